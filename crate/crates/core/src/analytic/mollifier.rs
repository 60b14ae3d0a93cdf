//! The smooth bump `Psi` and the Gaussian `Phi`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mollifier {
    Bump,
    Gaussian,
}

impl std::str::FromStr for Mollifier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bump" => Ok(Mollifier::Bump),
            "gaussian" => Ok(Mollifier::Gaussian),
            _ => Err(format!("unknown mollifier '{s}' (expected bump or gaussian)")),
        }
    }
}

fn g(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        (-1.0 / v).exp()
    }
}

/// Smooth step from 0 at `v <= 0` to 1 at `v >= 1`.
fn smoothstep(v: f64) -> f64 {
    let a = g(v);
    let b = g(1.0 - v);
    a / (a + b)
}

/// `C^infinity` bump: 0 outside `[1/2, 1]`, 1 on `[5/8, 7/8]`.
pub fn bump_psi(u: f64) -> f64 {
    if u <= 0.5 || u >= 1.0 {
        0.0
    } else if u < 0.625 {
        smoothstep((u - 0.5) * 8.0)
    } else if u <= 0.875 {
        1.0
    } else {
        smoothstep((1.0 - u) * 8.0)
    }
}

/// `hat Psi(0) = int Psi`, by quadrature on first use.
pub fn psi_hat0() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| {
        // Psi is smooth and flat at both ends, so the trapezoid rule is
        // spectrally accurate here.
        let n = 1 << 14;
        let h = 0.5 / n as f64;
        (1..n).map(|j| bump_psi(0.5 + j as f64 * h)).sum::<f64>() * h
    })
}

/// `Phi(t) = exp(-t^2 / 2)`.
pub fn phi(t: f64) -> f64 {
    (-0.5 * t * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        assert_eq!(bump_psi(0.7), 1.0);
        assert_eq!(bump_psi(0.625), 1.0);
        assert_eq!(bump_psi(0.875), 1.0);
        assert_eq!(bump_psi(0.4), 0.0);
        assert_eq!(bump_psi(0.5), 0.0);
        assert_eq!(bump_psi(1.0), 0.0);
        assert_eq!(bump_psi(1.3), 0.0);
        let v = bump_psi(9.0 / 16.0);
        assert!(v > 0.0 && v < 1.0);
        assert!((v - 0.5).abs() < 1e-15);
        assert!((v - (1.0 - bump_psi(15.0 / 16.0))).abs() < 1e-15);
        // mirror: u in the lower band <-> 3/2 - u in the upper band
        for i in 1..100 {
            let u = 0.5 + 0.125 * f64::from(i) / 100.0;
            assert!((bump_psi(u) - bump_psi(1.5 - u)).abs() < 1e-15);
            assert!((smoothstep((u - 0.5) * 8.0) + smoothstep(1.0 - (u - 0.5) * 8.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bump_monotone_on_bands() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let v = bump_psi(0.5 + 0.125 * f64::from(i) / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn bump_integral() {
        // symmetric transitions contribute 1/16 each
        assert!((psi_hat0() - 0.375).abs() < 1e-12);
    }

    #[test]
    fn gaussian() {
        assert_eq!(phi(0.0), 1.0);
        assert!((phi(1.0) - (-0.5f64).exp()).abs() < 1e-16);
        assert_eq!(phi(3.0), phi(-3.0));
    }

    #[test]
    fn parse() {
        assert_eq!("bump".parse::<Mollifier>().unwrap(), Mollifier::Bump);
        assert!("box".parse::<Mollifier>().is_err());
    }
}
