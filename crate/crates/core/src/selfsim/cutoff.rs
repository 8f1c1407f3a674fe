//! The background profile `f_0 = G chi(sqrt(t) |X| / d)`.

use crate::domain_fields::{oseen, Grid, ScalarField};
use crate::error::{Error, Result};

/// Non-increasing cutoff: 1 on `[0, 1/8]`, 0 on `[1/4, inf)`, and the
/// quintic smoothstep in between, which is C^2 at both joints.
pub fn chi(s: f64) -> f64 {
    if s <= 0.125 {
        1.0
    } else if s >= 0.25 {
        0.0
    } else {
        let x = 8.0 * (s - 0.125);
        1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

/// `f_0(t, X)` sampled at the cell centres of a rescaled frame.
pub fn background_f0(t: f64, d: f64, frame: &Grid) -> Result<ScalarField> {
    if !(t > 0.0) || !(d > 0.0) {
        return Err(Error::invalid(format!("need t > 0 and d > 0, got t = {t}, d = {d}")));
    }
    let st = t.sqrt();
    Ok(ScalarField::from_fn(*frame, |x, y| oseen(x, y) * chi(st * x.hypot(y) / d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_fields::lp_norm;
    use proptest::prelude::*;

    #[test]
    fn joints_are_c2() {
        // C^2 contact with the constant pieces means |chi(s0 + h) - chi(s0)| = O(h^3).
        for (s0, dir) in [(0.125, 1.0), (0.25, -1.0)] {
            for h in [1e-2, 1e-3, 1e-4] {
                let jump = (chi(s0 + dir * h) - chi(s0)).abs();
                assert!(jump <= 10.0 * 512.0 * h * h * h * 1.01, "s0 = {s0}, h = {h}: {jump}");
            }
        }
        assert!((chi(0.1875) - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn chi_is_monotone_and_bounded(a in 0.0f64..0.4, b in 0.0f64..0.4) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(chi(lo) >= chi(hi));
            prop_assert!((0.0..=1.0).contains(&chi(a)));
        }
    }

    #[test]
    fn background_regions() {
        let frame = Grid::frame(10.0, 128).unwrap();
        let (t, d) = (1e-2, 1.0);
        let f0 = background_f0(t, d, &frame).unwrap();
        for i in 0..128 {
            for j in 0..128 {
                let (x, y) = (frame.r(i), frame.z(j));
                let s = t.sqrt() * x.hypot(y) / d;
                if s <= 0.125 {
                    assert_eq!(f0.at(i, j), oseen(x, y));
                }
                if s >= 0.25 {
                    assert_eq!(f0.at(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn background_close_to_oseen() {
        // |f_0 - G|_1 <= int_{|X| >= d/(8 sqrt t)} G = exp(-(d/(8 sqrt t))^2 / 4).
        let (t, d) = (1e-2, 0.6);
        let frame = Grid::frame(10.0, 400).unwrap();
        let f0 = background_f0(t, d, &frame).unwrap();
        let g = ScalarField::from_fn(frame, oseen);
        let diff = lp_norm(&f0.sub(&g).unwrap(), 1.0).unwrap();
        let rho = d / (8.0 * t.sqrt());
        let tail = (-rho * rho / 4.0).exp();
        assert!(diff > 0.0 && diff <= tail * 1.01, "{diff:.4e} vs {tail:.4e}");
    }
}
