use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use exchange_lab::dynamics::{run_pulse_interference, Schedule};
use exchange_lab::fock::{apply_hop_sequence, FockBasisState, Hop, RegisterLayout, Sign, StateVector};
use exchange_lab::oracle::random_state;
use exchange_lab::protocols::{extract_phase, wrap_phase, ExperimentResult};
use exchange_lab::verify::{hop_sign_law, random_closed_loop, worldline_parity};
use exchange_lab::Amplitude;

fn fermions(m: usize) -> Arc<RegisterLayout> {
    Arc::new(RegisterLayout::fermions(m).unwrap())
}

fn circle_distance(a: f64, b: f64) -> f64 {
    ((a - b + PI).rem_euclid(2.0 * PI) - PI).abs()
}

#[test]
fn hop_sign_law_ten_modes() {
    let dev = hop_sign_law(&fermions(10)).unwrap();
    assert!(dev <= 1e-12, "{dev}");
}

/// Legal hops from a random start, with the occupation tracked independently.
fn legal_walk() -> impl Strategy<Value = (usize, u64, Vec<(u32, u32)>)> {
    (2usize..=10, any::<u64>(), prop::collection::vec((any::<u32>(), any::<u32>()), 0..24)).prop_map(
        |(m, bits, picks)| {
            let mut occ = bits & ((1u64 << m) - 1);
            let start = occ;
            let mut hops = Vec::new();
            for (a, b) in picks {
                let full: Vec<u32> = (0..m as u32).filter(|k| occ >> k & 1 == 1).collect();
                let empty: Vec<u32> = (0..m as u32).filter(|k| occ >> k & 1 == 0).collect();
                if full.is_empty() || empty.is_empty() {
                    break;
                }
                let (i, j) = (full[a as usize % full.len()], empty[b as usize % empty.len()]);
                occ ^= (1 << i) | (1 << j);
                hops.push((i + 1, j + 1));
            }
            (m, start, hops)
        },
    )
}

proptest! {
    #[test]
    fn ledger_is_complete((m, start, pairs) in legal_walk()) {
        let layout = fermions(m);
        let hops: Vec<Hop> = pairs.iter().map(|&(a, b)| Hop::between(a, b).unwrap()).collect();
        let psi = StateVector::basis(layout, FockBasisState::new(start, m).unwrap()).unwrap();
        let (out, ledger) = apply_hop_sequence(&hops, &psi).unwrap();
        prop_assert_eq!(ledger.steps(), hops.len());
        prop_assert_eq!(ledger.entries().len(), hops.len());
        let mut occ = start;
        for (k, (e, &(a, b))) in ledger.entries().iter().zip(&pairs).enumerate() {
            let (lo, hi) = (a.min(b), a.max(b));
            let between = (lo + 1..hi).filter(|q| occ >> (q - 1) & 1 == 1).count() as u32;
            prop_assert_eq!(e.step, k + 1);
            prop_assert_eq!(e.interval_parity, between);
            prop_assert_eq!(e.sign, Sign::from_parity(between));
            occ ^= (1 << (a - 1)) | (1 << (b - 1));
        }
        prop_assert_eq!(out.len(), 1);
        let (idx, amp) = out.iter().next().unwrap();
        prop_assert_eq!(idx, occ);
        prop_assert!((amp - Amplitude::new(ledger.product().to_f64(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn phase_extraction_recovers_alpha(seed in any::<u64>(), alpha in -10.0f64..10.0, beta in 0.0f64..1.5) {
        let layout = fermions(5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(layout.clone(), &mut rng);
        let rotated = psi.scale(Amplitude::from_polar(1.0, alpha));
        let r = extract_phase(&psi, &rotated).unwrap();
        prop_assert!(circle_distance(r.phase.unwrap(), wrap_phase(alpha)) < 1e-12);
        prop_assert!((r.visibility - 1.0).abs() < 1e-12);

        // mix in an orthogonal component: visibility drops to cos β, phase unchanged
        let probe = random_state(layout.clone(), &mut rng);
        let proj = exchange_lab::fock::inner_product(&psi, &probe).unwrap();
        let chi = probe.add(&psi.scale(-proj)).unwrap().normalized().unwrap();
        let mixed = psi.scale(Amplitude::new(beta.cos(), 0.0)).add(&chi.scale(Amplitude::new(beta.sin(), 0.0))).unwrap();
        let r = extract_phase(&psi, &mixed.scale(Amplitude::from_polar(1.0, alpha))).unwrap();
        prop_assert!((r.visibility - beta.cos()).abs() < 1e-12);
        prop_assert!(circle_distance(r.phase.unwrap(), wrap_phase(alpha)) < 1e-10);
    }
}

#[test]
fn phase_extraction_hundred_alphas() {
    let layout = fermions(4);
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let alpha: f64 = rng.random_range(-PI..PI);
        let psi = random_state(layout.clone(), &mut rng);
        let r = extract_phase(&psi, &psi.scale(Amplitude::from_polar(1.0, alpha))).unwrap();
        assert!(circle_distance(r.phase.unwrap(), alpha) < 1e-12);
    }
}

fn as_transfers(hops: &[Hop]) -> Schedule {
    let pairs: Vec<(u32, u32)> = hops.iter().map(|h| (h.from.value(), h.to.value())).collect();
    Schedule::full_transfers(&pairs).unwrap()
}

fn relative_sign(r: &ExperimentResult) -> f64 {
    (r.ledgers[0].product() * r.ledgers[1].product()).to_f64()
}

/// Each full transfer multiplies by `i`; schedules of equal length cancel these
/// factors, leaving the ledger signs (and world-line parity) as the whole phase.
#[test]
fn equal_transfer_counts_cancel() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 300 {
        let m = rng.random_range(3..=8usize);
        let (start, mut a) = random_closed_loop(m, &mut rng);
        let occupied: Vec<_> = start.occupied_modes().collect();
        if occupied.is_empty() || occupied.len() == m {
            continue;
        }
        let mut b = other_loop(start, &mut rng);
        if (a.len() + b.len()) % 2 == 1 {
            continue;
        }
        // pad the shorter loop with there-and-back pairs
        let p = occupied[0].value();
        let q = (1..=m as u32).find(|k| !start.is_occupied(exchange_lab::fock::mode(*k))).unwrap();
        let (short, long) = if a.len() < b.len() { (&mut a, &b) } else { (&mut b, &a) };
        while short.len() < long.len() {
            short.push(Hop::between(p, q).unwrap());
            short.push(Hop::between(q, p).unwrap());
        }
        let layout = fermions(m);
        let r = run_pulse_interference(layout, &as_transfers(&a), &as_transfers(&b), start).unwrap();
        assert!((r.visibility - 1.0).abs() < 1e-12);
        let expected = if relative_sign(&r) < 0.0 { PI } else { 0.0 };
        assert!(circle_distance(r.phase.unwrap(), expected) < 1e-10, "{a:?} vs {b:?}");
        let parity = (worldline_parity(start, &a) * worldline_parity(start, &b)).to_f64();
        assert_eq!(parity, relative_sign(&r));
        checked += 1;
    }
}

/// A closed loop from `start`: random hops, then each displaced particle sent
/// to a randomly chosen vacated site.
fn other_loop(start: FockBasisState, rng: &mut ChaCha8Rng) -> Vec<Hop> {
    let m = start.modes() as u32;
    let mut occ = start.bits();
    let mut hops = Vec::new();
    for _ in 0..rng.random_range(1..6) {
        let full: Vec<u32> = (0..m).filter(|k| occ >> k & 1 == 1).collect();
        let empty: Vec<u32> = (0..m).filter(|k| occ >> k & 1 == 0).collect();
        let i = full[rng.random_range(0..full.len())];
        let j = empty[rng.random_range(0..empty.len())];
        occ ^= (1 << i) | (1 << j);
        hops.push(Hop::between(i + 1, j + 1).unwrap());
    }
    // move particles back: pair each misplaced particle with a vacated target
    let extra: Vec<u32> = (0..m).filter(|k| occ >> k & 1 == 1 && start.bits() >> k & 1 == 0).collect();
    let mut missing: Vec<u32> = (0..m).filter(|k| occ >> k & 1 == 0 && start.bits() >> k & 1 == 1).collect();
    for i in extra {
        let pos = rng.random_range(0..missing.len());
        let j = missing.swap_remove(pos);
        hops.push(Hop::between(i + 1, j + 1).unwrap());
    }
    hops
}
