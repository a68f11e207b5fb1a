//! Quantities written as "<number> <unit>", converted to SI.

use std::f64::consts::PI;

use sgi_core::constants::{H_PLANCK, K_B};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Length,
    Density,
    Field,
    Gradient,
    Time,
    Angle,
    AngularRate,
    Acceleration,
    Temperature,
    /// Energies, also accepted as frequencies (E = h·f) or temperatures.
    Energy,
    MagneticMoment,
    SusceptibilityPerMass,
}

impl Dim {
    pub fn si(self) -> &'static str {
        match self {
            Dim::Length => "m",
            Dim::Density => "kg/m^3",
            Dim::Field => "T",
            Dim::Gradient => "T/m",
            Dim::Time => "s",
            Dim::Angle => "rad",
            Dim::AngularRate => "rad/s",
            Dim::Acceleration => "m/s^2",
            Dim::Temperature => "K",
            Dim::Energy => "J",
            Dim::MagneticMoment => "J/T",
            Dim::SusceptibilityPerMass => "m^3/kg",
        }
    }

    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dim::Length => &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("μm", 1e-6), ("nm", 1e-9), ("pm", 1e-12)],
            Dim::Density => &[("kg/m^3", 1.0), ("g/cm^3", 1e3)],
            Dim::Field => &[("T", 1.0), ("mT", 1e-3), ("uT", 1e-6), ("μT", 1e-6), ("G", 1e-4), ("mG", 1e-7)],
            Dim::Gradient => {
                &[("T/m", 1.0), ("G/cm", 1e-2), ("G/mm", 1e-1), ("G/um", 1e2), ("G/μm", 1e2), ("G/nm", 1e5)]
            }
            Dim::Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("μs", 1e-6), ("ns", 1e-9)],
            Dim::Angle => &[("rad", 1.0), ("mrad", 1e-3), ("deg", PI / 180.0), ("°", PI / 180.0)],
            Dim::AngularRate => &[("rad/s", 1.0), ("mrad/s", 1e-3), ("Hz", 2.0 * PI), ("kHz", 2e3 * PI)],
            Dim::Acceleration => &[("m/s^2", 1.0), ("m/s2", 1.0)],
            Dim::Temperature => &[("K", 1.0), ("mK", 1e-3), ("uK", 1e-6), ("μK", 1e-6), ("nK", 1e-9)],
            Dim::Energy => &[
                ("J", 1.0),
                ("Hz", H_PLANCK),
                ("kHz", H_PLANCK * 1e3),
                ("MHz", H_PLANCK * 1e6),
                ("GHz", H_PLANCK * 1e9),
                ("K", K_B),
                ("mK", K_B * 1e-3),
            ],
            Dim::MagneticMoment => &[("J/T", 1.0)],
            Dim::SusceptibilityPerMass => &[("m^3/kg", 1.0)],
        }
    }

    pub fn accepted(self) -> String {
        self.units().iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", ")
    }
}

/// Parses "<number> <unit>" into SI, matching the longest unit suffix. A
/// bare number is accepted only for zero, where the unit does not matter.
pub fn parse(text: &str, dim: Dim) -> Result<f64, String> {
    let t = text.trim();
    let number = |s: &str| -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("'{text}': cannot read a number from '{}'", s.trim()))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("'{text}': value must be finite"))
        }
    };
    if let Ok(v) = t.parse::<f64>() {
        return if v == 0.0 { Ok(0.0) } else { Err(format!("'{text}': missing unit (one of {})", dim.accepted())) };
    }
    let mut units = dim.units().to_vec();
    units.sort_by_key(|(u, _)| std::cmp::Reverse(u.len()));
    for (u, f) in units {
        if let Some(num) = t.strip_suffix(u) {
            if num.trim().parse::<f64>().is_ok() {
                return Ok(number(num)? * f);
            }
        }
    }
    Err(format!("'{text}': expected '<number> <unit>' with unit one of {}", dim.accepted()))
}
