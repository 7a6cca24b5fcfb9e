//! Interferometric phases from path length and from gravity.
//!
//! Phases are returned unwrapped.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod constants {
    /// Reduced Planck constant in J·s (CODATA 2018, exact since the 2019 SI redefinition).
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Neutron mass in kg (CODATA 2018).
    pub const NEUTRON_MASS: f64 = 1.674_927_498_04e-27;
    /// Standard acceleration of gravity in m/s² (CGPM 1901 conventional value).
    pub const STANDARD_GRAVITY: f64 = 9.806_65;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    /// Length in metres.
    pub length: f64,
    /// Effective refractive index.
    pub index: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathProfile {
    pub segments: Vec<Segment>,
}

impl PathProfile {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let p = PathProfile { segments };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.segments {
            if !s.length.is_finite() || !s.index.is_finite() || s.length < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "segment (length {}, index {}) must be finite with non-negative length",
                    s.length, s.index
                )));
            }
        }
        Ok(())
    }

    /// `Σ n·dx` over the path.
    pub fn optical_length(&self) -> f64 {
        self.segments.iter().map(|s| s.index * s.length).sum()
    }
}

/// Phase difference `2π (L1 - L2) / λ` between two optical paths.
pub fn optical_path_phase(p1: &PathProfile, p2: &PathProfile, wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::InvalidWavelength(wavelength));
    }
    p1.validate()?;
    p2.validate()?;
    Ok(2.0 * PI * ((p1.optical_length() - p2.optical_length()) / wavelength))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CowParams {
    /// kg
    pub mass: f64,
    /// m/s²
    pub gravity: f64,
    /// m
    pub height: f64,
    /// s
    pub time: f64,
}

impl CowParams {
    pub fn neutron(height: f64, time: f64) -> Self {
        CowParams {
            mass: constants::NEUTRON_MASS,
            gravity: constants::STANDARD_GRAVITY,
            height,
            time,
        }
    }
}

/// Gravitational phase `m g h t / ħ` between two paths separated by `h`.
pub fn cow_phase(p: &CowParams) -> Result<f64> {
    let all_finite = [p.mass, p.gravity, p.height, p.time].iter().all(|v| v.is_finite());
    if !all_finite || p.mass < 0.0 || p.time < 0.0 {
        return Err(Error::InvalidParameter(format!("invalid gravitational parameters {p:?}")));
    }
    Ok(p.mass * p.gravity * p.height * p.time / constants::HBAR)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalRequest {
    pub p1: PathProfile,
    pub p2: PathProfile,
    pub wavelength: f64,
}

/// Input document of the `reference` command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optical: Option<OpticalRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cow: Option<CowParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceResponse {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optical_phase_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cow_phase_rad: Option<f64>,
    pub hbar: f64,
}

impl ReferenceRequest {
    /// Half-wave plate at 500 nm and a neutron over 1 cm for 1 ms.
    pub fn demo() -> Self {
        let wavelength = 500e-9;
        ReferenceRequest {
            optical: Some(OpticalRequest {
                p1: PathProfile { segments: vec![Segment { length: wavelength / 2.0, index: 1.0 }] },
                p2: PathProfile::default(),
                wavelength,
            }),
            cow: Some(CowParams::neutron(0.01, 1e-3)),
        }
    }

    pub fn evaluate(&self) -> Result<ReferenceResponse> {
        if self.optical.is_none() && self.cow.is_none() {
            return Err(Error::InvalidParameter("request has neither `optical` nor `cow`".into()));
        }
        Ok(ReferenceResponse {
            optical_phase_rad: self
                .optical
                .as_ref()
                .map(|o| optical_path_phase(&o.p1, &o.p2, o.wavelength))
                .transpose()?,
            cow_phase_rad: self.cow.as_ref().map(cow_phase).transpose()?,
            hbar: constants::HBAR,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(segs: &[(f64, f64)]) -> PathProfile {
        PathProfile::new(segs.iter().map(|&(length, index)| Segment { length, index }).collect()).unwrap()
    }

    #[test]
    fn identical_paths_have_no_phase() {
        let p = path(&[(0.3, 1.33), (0.2, 1.0)]);
        assert_eq!(optical_path_phase(&p, &p, 633e-9).unwrap(), 0.0);
    }

    #[test]
    fn half_wave_plate_is_exactly_pi() {
        let lambda = 500e-9;
        let base = path(&[(0.1, 1.0)]);
        let mut with_plate = base.clone();
        with_plate.segments.push(Segment { length: lambda / 2.0, index: 1.0 });
        // the extra segment alone against an empty arm
        assert_eq!(optical_path_phase(&path(&[(lambda / 2.0, 1.0)]), &PathProfile::default(), lambda).unwrap(), PI);
        let d = optical_path_phase(&with_plate, &base, lambda).unwrap();
        assert!((d - PI).abs() < 1e-6, "{d}");
    }

    #[test]
    fn glass_slab() {
        let d = optical_path_phase(&path(&[(1.0, 1.5)]), &path(&[(1.0, 1.0)]), 500e-9).unwrap();
        let expected = 2.0 * PI * 0.5 / 500e-9;
        assert!(((d - expected) / expected).abs() < 1e-15);
    }

    #[test]
    fn doubling_lengths_doubles_phase() {
        let p1 = path(&[(0.25, 1.7), (0.5, 1.2)]);
        let p2 = path(&[(0.125, 1.0)]);
        let double = |p: &PathProfile| path(&p.segments.iter().map(|s| (2.0 * s.length, s.index)).collect::<Vec<_>>());
        let a = optical_path_phase(&p1, &p2, 1e-6).unwrap();
        let b = optical_path_phase(&double(&p1), &double(&p2), 1e-6).unwrap();
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn bad_inputs() {
        let p = PathProfile::default();
        assert!(matches!(optical_path_phase(&p, &p, 0.0), Err(Error::InvalidWavelength(_))));
        assert!(optical_path_phase(&p, &p, -1.0).is_err());
        assert!(PathProfile::new(vec![Segment { length: -1.0, index: 1.0 }]).is_err());
        assert!(cow_phase(&CowParams { mass: f64::NAN, gravity: 1.0, height: 1.0, time: 1.0 }).is_err());
    }

    #[test]
    fn cow_zero_height_or_time() {
        assert_eq!(cow_phase(&CowParams::neutron(0.0, 1e-3)).unwrap(), 0.0);
        assert_eq!(cow_phase(&CowParams::neutron(0.01, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn cow_is_multilinear() {
        let base = CowParams { mass: 2.0e-27, gravity: 9.8, height: 0.02, time: 2e-3 };
        let phi = cow_phase(&base).unwrap();
        for k in [0.5, 3.0] {
            let scaled = [
                CowParams { mass: base.mass * k, ..base },
                CowParams { gravity: base.gravity * k, ..base },
                CowParams { height: base.height * k, ..base },
                CowParams { time: base.time * k, ..base },
            ];
            for s in scaled {
                assert!((cow_phase(&s).unwrap() / (k * phi) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn request_round_trip() {
        let req = ReferenceRequest::demo();
        let text = serde_json::to_string(&req).unwrap();
        let back: ReferenceRequest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, req);
        assert!(serde_json::from_str::<ReferenceRequest>(r#"{"cow": {"mass": 1, "gravity": 1, "height": 1, "time": 1, "x": 2}}"#).is_err());
        assert!(ReferenceRequest::default().evaluate().is_err());
    }
}
