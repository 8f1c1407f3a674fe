//! Complete elliptic integrals and the circular-filament kernels.
//!
//! A ring of unit circulation through `(rs, zs)` induces the stream function
//! `psi = sqrt(r rs)/(2 pi) * ((2 - m) K(m) - 2 E(m)) / sqrt(m)` with
//! `m = 4 r rs / ((r + rs)^2 + (z - zs)^2)`, and the velocity
//! `u^r = -d_z psi / r`, `u^z = d_r psi / r`.

use std::f64::consts::PI;

/// `(K(m), E(m))` for parameter `m = k^2` in `[0, 1)`, by the arithmetic-geometric mean.
pub fn ellip_ke(m: f64) -> (f64, f64) {
    debug_assert!((0.0..1.0).contains(&m), "elliptic parameter {m} out of range");
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut sum = 0.5 * m;
    let mut pow = 0.5;
    for _ in 0..40 {
        let c = 0.5 * (a - b);
        if c.abs() <= 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

// Series of ((2 - m) K - 2 E) / (pi m^2 / 16) about m = 0.
const SMALL_M: [f64; 7] = [
    1.0,
    3.0 / 4.0,
    75.0 / 128.0,
    245.0 / 512.0,
    6615.0 / 16384.0,
    22869.0 / 65536.0,
    1288287.0 / 4194304.0,
];

/// `(2 - m) K(m) - 2 E(m)` without cancellation at small `m`.
fn ring_bracket(m: f64) -> f64 {
    if m < 1e-2 {
        let mut acc = 0.0;
        for c in SMALL_M.iter().rev() {
            acc = acc * m + c;
        }
        PI / 16.0 * m * m * acc
    } else {
        let (k, e) = ellip_ke(m);
        (2.0 - m) * k - 2.0 * e
    }
}

/// Stream function at `(r, z)` of a unit-circulation ring through `(rs, zs)`.
pub fn ring_stream(r: f64, z: f64, rs: f64, zs: f64) -> f64 {
    if r <= 0.0 || rs <= 0.0 {
        return 0.0;
    }
    let dz = z - zs;
    let s = (r + rs) * (r + rs) + dz * dz;
    let m = 4.0 * r * rs / s;
    (r * rs).sqrt() / (2.0 * PI) * ring_bracket(m) / m.sqrt()
}

/// Velocity `(u^r, u^z)` at `(r, z)` of a unit-circulation ring through `(rs, zs)`.
/// Singular at the ring itself.
pub fn ring_velocity(r: f64, z: f64, rs: f64, zs: f64) -> (f64, f64) {
    let dz = z - zs;
    let s = (r + rs) * (r + rs) + dz * dz;
    let q = (r - rs) * (r - rs) + dz * dz;
    let sq = s.sqrt();
    if r <= 0.0 {
        // On the axis: u^r = 0, u^z = rs^2 / (2 s^(3/2)).
        return (0.0, rs * rs / (2.0 * s * sq));
    }
    let m = 4.0 * r * rs / s;
    let (k, e) = ellip_ke(m.min(1.0 - 1e-16));
    let uz = (k + (rs * rs - r * r - dz * dz) / q * e) / (2.0 * PI * sq);
    let ur = if r * 1e5 < rs {
        // Leading small-r behaviour avoids the K ~ E cancellation:
        // u^r ~ (3/4) r rs^2 dz / s^(5/2).
        0.75 * r * rs * rs * dz / (s * s * sq)
    } else {
        dz / (2.0 * PI * r * sq) * (-k + (rs * rs + r * r + dz * dz) / q * e)
    };
    (ur, uz)
}

/// `(psi, d psi / d rs, d psi / d zs)` for a unit ring through `(rs, zs)`,
/// sharing one elliptic evaluation. The kernel is symmetric under swapping
/// field and source points, so `d/d zs = r u^r(r, z)` and
/// `d/d rs = rs u^z` of the swapped pair.
pub fn ring_stream_with_source_gradient(r: f64, z: f64, rs: f64, zs: f64) -> (f64, f64, f64) {
    let dz = z - zs;
    let s = (r + rs) * (r + rs) + dz * dz;
    let m = if r > 0.0 && rs > 0.0 { 4.0 * r * rs / s } else { 0.0 };
    if m < 1e-2 || r * 1e5 < rs {
        let (ur, _) = ring_velocity(r, z, rs, zs);
        let (_, uz_swapped) = ring_velocity(rs, zs, r, z);
        return (ring_stream(r, z, rs, zs), rs * uz_swapped, r * ur);
    }
    let (k, e) = ellip_ke(m.min(1.0 - 1e-16));
    let q = (r - rs) * (r - rs) + dz * dz;
    let sq = s.sqrt();
    let psi = (r * rs).sqrt() / (2.0 * PI) * ((2.0 - m) * k - 2.0 * e) / m.sqrt();
    let d_rs = rs * (k + (r * r - rs * rs - dz * dz) / q * e) / (2.0 * PI * sq);
    let d_zs = dz / (2.0 * PI * sq) * (-k + (rs * rs + r * r + dz * dz) / q * e);
    (psi, d_rs, d_zs)
}
