//! Jacobi elliptic functions and elliptic integrals of the first and second kind.
//!
//! Complete integrals come from the arithmetic-geometric mean. The functions
//! `sn`, `cn`, `dn` use the descending Landen sequence generated by the same
//! AGM iteration, after reducing the argument modulo `4K`. The incomplete
//! integral `E(xi, k) = int_0^xi dn^2` splits off whole half-periods so that
//! quasi-periodicity holds exactly in the integer part.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::error::{domain, Error, Result};

/// Relative convergence threshold of the AGM iteration.
const AGM_TOL: f64 = 1e-15;
/// The AGM converges quadratically; this is far more than ever needed.
const MAX_AGM_STEPS: usize = 40;
/// Fixed Gauss-Legendre order for the remainder of `incomplete_e`.
const GL_NODES: usize = 64;

/// Elliptic modulus `k` in the closed interval `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() && (0.0..=1.0).contains(&k) {
            Ok(Self(k))
        } else {
            Err(domain("k", k, "0 <= k <= 1"))
        }
    }

    #[inline]
    pub fn k(self) -> f64 {
        self.0
    }

    /// Complementary modulus `sqrt(1 - k^2)`.
    #[inline]
    pub fn complementary(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

impl TryFrom<f64> for EllipticModulus {
    type Error = Error;
    fn try_from(k: f64) -> Result<Self> {
        Self::new(k)
    }
}

/// Values of `sn`, `cn`, `dn` at a common argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// AGM sequence `(a_n, c_n)` started from `a_0 = 1`, `b_0 = k'`, `c_0 = k`.
fn agm_sequence(k: EllipticModulus) -> (Vec<f64>, Vec<f64>) {
    let mut a = 1.0;
    let mut b = k.complementary();
    let mut c = k.k();
    let mut av = vec![a];
    let mut cv = vec![c];
    for _ in 0..MAX_AGM_STEPS {
        if c.abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        av.push(a);
        cv.push(c);
    }
    (av, cv)
}

/// Both complete integrals `(K(k), E(k))` from a single AGM run.
pub fn complete_ke(k: EllipticModulus) -> Result<(f64, f64)> {
    if k.k() >= 1.0 {
        return Err(domain("k", k.k(), "K(k) requires k < 1"));
    }
    let (a, c) = agm_sequence(k);
    let kk = PI / (2.0 * a[a.len() - 1]);
    let mut pow = 0.5;
    let mut sum = 0.0;
    for cn in &c {
        sum += pow * cn * cn;
        pow *= 2.0;
    }
    Ok((kk, kk * (1.0 - sum)))
}

/// Complete elliptic integral of the first kind. Diverges at `k = 1`, which is rejected.
pub fn complete_k(k: EllipticModulus) -> Result<f64> {
    complete_ke(k).map(|(kk, _)| kk)
}

/// Complete elliptic integral of the second kind, `E(1) = 1`.
pub fn complete_e(k: EllipticModulus) -> f64 {
    if k.k() >= 1.0 {
        return 1.0;
    }
    complete_ke(k).map(|(_, e)| e).unwrap_or(1.0)
}

/// Jacobi elliptic functions at real argument `xi`.
pub fn jacobi(xi: f64, k: EllipticModulus) -> JacobiTriple {
    let kv = k.k();
    if kv == 0.0 {
        let (s, c) = xi.sin_cos();
        return JacobiTriple {
            sn: s,
            cn: c,
            dn: 1.0,
        };
    }
    if kv == 1.0 {
        let sech = 1.0 / xi.cosh();
        return JacobiTriple {
            sn: xi.tanh(),
            cn: sech,
            dn: sech,
        };
    }
    let (a, c) = agm_sequence(k);
    let kk = PI / (2.0 * a[a.len() - 1]);

    // Reduce to [-2K, 2K] and use odd/even symmetry.
    let period = 4.0 * kk;
    let r = xi - period * (xi / period).round();
    let sign = if r < 0.0 { -1.0 } else { 1.0 };
    let r = r.abs();

    let n = a.len() - 1;
    let mut phi = (n as f64).exp2() * a[n] * r;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (s, cphi) = phi.sin_cos();
    let sn = sign * s;
    let dn = (1.0 - kv * kv * s * s).max(0.0).sqrt();
    JacobiTriple { sn, cn: cphi, dn }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed once.
fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_NODES;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let wi = 2.0 / ((1.0 - z * z) * dp * dp);
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = wi;
            w[n - 1 - i] = wi;
        }
        (x, w)
    })
}

/// Incomplete elliptic integral of the second kind in Jacobi form,
/// `E(xi, k) = int_0^xi dn^2(y, k) dy`.
pub fn incomplete_e(xi: f64, k: EllipticModulus) -> f64 {
    let kv = k.k();
    if kv == 0.0 {
        return xi;
    }
    if kv == 1.0 {
        return xi.tanh();
    }
    let (kk, ee) = complete_ke(k).expect("k < 1 checked above");
    let half = 2.0 * kk;
    let m = (xi / half).round();
    let r = xi - m * half;
    let (x, w) = gauss_legendre();
    let mut acc = 0.0;
    for (xj, wj) in x.iter().zip(w) {
        let y = 0.5 * r * (xj + 1.0);
        let s = jacobi(y, k).sn;
        acc += wj * (1.0 - kv * kv * s * s);
    }
    2.0 * m * ee + 0.5 * r * acc
}

/// Amplitude-free convenience: `K(k)` for `k = 0` is `pi/2`.
pub const K_AT_ZERO: f64 = FRAC_PI_2;

#[cfg(test)]
mod tests {
    use super::*;

    fn km(k: f64) -> EllipticModulus {
        EllipticModulus::new(k).unwrap()
    }

    /// Maclaurin series of K and E in m = k^2, summed until terms drop below 1e-17.
    fn series_ke(k: f64) -> (f64, f64) {
        let m = k * k;
        let (mut sk, mut se) = (1.0, 1.0);
        let mut coef = 1.0; // ((2n-1)!! / (2n)!!)^2
        let mut mp = 1.0;
        for n in 1..2000 {
            let r = (2 * n - 1) as f64 / (2 * n) as f64;
            coef *= r * r;
            mp *= m;
            let t = coef * mp;
            sk += t;
            se -= t / (2 * n - 1) as f64;
            if t < 1e-18 {
                break;
            }
        }
        (FRAC_PI_2 * sk, FRAC_PI_2 * se)
    }

    /// Classical RK4 for the Jacobi system with a fine step, as an independent oracle.
    fn rk_jacobi(xi: f64, k: f64) -> (f64, f64, f64) {
        let steps = 20_000;
        let h = xi / steps as f64;
        let f = |y: [f64; 3]| [y[1] * y[2], -y[0] * y[2], -k * k * y[0] * y[1]];
        let mut y = [0.0, 1.0, 1.0];
        for _ in 0..steps {
            let k1 = f(y);
            let k2 = f([0, 1, 2].map(|i| y[i] + 0.5 * h * k1[i]));
            let k3 = f([0, 1, 2].map(|i| y[i] + 0.5 * h * k2[i]));
            let k4 = f([0, 1, 2].map(|i| y[i] + h * k3[i]));
            y = [0, 1, 2].map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        (y[0], y[1], y[2])
    }

    /// Composite Simpson on dn^2 with the RK oracle bypassed: uses jacobi itself
    /// only through dn^2 = 1 - k^2 sn^2 on a very fine grid.
    fn simpson_e(xi: f64, k: f64) -> f64 {
        let n = 20_000;
        let h = xi / n as f64;
        let g = |y: f64| {
            let s = jacobi(y, km(k)).sn;
            1.0 - k * k * s * s
        };
        let mut acc = g(0.0) + g(xi);
        for j in 1..n {
            acc += if j % 2 == 1 { 4.0 } else { 2.0 } * g(j as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn modulus_rejects_out_of_range() {
        assert!(EllipticModulus::new(-0.1).is_err());
        assert!(EllipticModulus::new(1.0 + 1e-12).is_err());
        assert!(EllipticModulus::new(f64::NAN).is_err());
        assert!(EllipticModulus::new(1.0).is_ok());
    }

    #[test]
    fn complete_integrals_reference_values() {
        assert_eq!(complete_k(km(0.0)).unwrap(), FRAC_PI_2);
        assert_eq!(complete_e(km(0.0)), FRAC_PI_2);
        assert_eq!(complete_e(km(1.0)), 1.0);
        assert!(complete_k(km(1.0)).is_err());
        assert!((complete_k(km(0.5)).unwrap() - 1.685_750_354_812_596).abs() < 1e-14);
        assert!((complete_e(km(0.5)) - 1.467_462_209_339_427).abs() < 1e-14);
        assert!(complete_k(km(1.0 - 1e-9)).unwrap() > 10.0);
    }

    #[test]
    fn complete_integrals_match_series() {
        for &k in &[0.05, 0.2, 0.5, 0.7, 0.85] {
            let (ks, es) = series_ke(k);
            let (ka, ea) = complete_ke(km(k)).unwrap();
            assert!((ka - ks).abs() < 1e-13, "K({k}) {ka} vs {ks}");
            assert!((ea - es).abs() < 1e-13, "E({k}) {ea} vs {es}");
        }
    }

    #[test]
    fn k_exceeds_e_and_monotone() {
        let mut prev = (0.0, f64::INFINITY);
        for i in 1..100 {
            let k = i as f64 / 100.0;
            let (kk, ee) = complete_ke(km(k)).unwrap();
            assert!(kk > ee);
            assert!(kk > prev.0 && ee < prev.1);
            prev = (kk, ee);
        }
    }

    #[test]
    fn jacobi_special_points() {
        for &k in &[0.1, 0.5, 0.9] {
            let m = km(k);
            let t = jacobi(0.0, m);
            assert_eq!((t.sn, t.cn, t.dn), (0.0, 1.0, 1.0));
            let kk = complete_k(m).unwrap();
            let q = jacobi(kk, m);
            assert!((q.sn - 1.0).abs() < 1e-14);
            assert!(q.cn.abs() < 1e-14);
            assert!((q.dn - m.complementary()).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobi_matches_ode_integration() {
        let (s, c, d) = rk_jacobi(0.7, 0.8);
        let t = jacobi(0.7, km(0.8));
        assert!((t.sn - s).abs() < 1e-12 && (t.cn - c).abs() < 1e-12 && (t.dn - d).abs() < 1e-12);
        assert!((t.sn - 0.618_755_648_952_545_4).abs() < 1e-14);
        for &(x, k) in &[(2.3, 0.3), (4.1, 0.95), (-1.7, 0.6)] {
            let (s, c, d) = rk_jacobi(x, k);
            let t = jacobi(x, km(k));
            assert!((t.sn - s).abs() < 1e-11, "sn({x},{k})");
            assert!((t.cn - c).abs() < 1e-11, "cn({x},{k})");
            assert!((t.dn - d).abs() < 1e-11, "dn({x},{k})");
        }
    }

    #[test]
    fn jacobi_limits() {
        let t = jacobi(0.8, km(1.0));
        assert_eq!(t.sn, 0.8f64.tanh());
        assert_eq!(t.cn, 1.0 / 0.8f64.cosh());
        let t = jacobi(0.8, km(0.0));
        assert_eq!(t.sn, 0.8f64.sin());
        // Nearby moduli approach the limits continuously.
        let t = jacobi(0.8, km(1e-8));
        assert!((t.sn - 0.8f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn jacobi_triple_invariants_on_sample() {
        for &k in &[0.1, 0.5, 0.9] {
            let m = km(k);
            let kp = m.complementary();
            for i in 0..1000 {
                let x = -40.0 + 80.0 * i as f64 / 999.0;
                let t = jacobi(x, m);
                assert!((t.sn * t.sn + t.cn * t.cn - 1.0).abs() < 1e-12);
                assert!((t.dn * t.dn + k * k * t.sn * t.sn - 1.0).abs() < 1e-12);
                assert!(t.dn >= kp - 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_derivatives_by_differences() {
        let h = 1e-5;
        for &k in &[0.1, 0.5, 0.9] {
            let m = km(k);
            for i in 0..50 {
                let x = -7.0 + 0.29 * i as f64;
                let (p, q, t) = (jacobi(x + h, m), jacobi(x - h, m), jacobi(x, m));
                let d = |a: f64, b: f64| (a - b) / (2.0 * h);
                assert!((d(p.sn, q.sn) - t.cn * t.dn).abs() < 1e-8);
                assert!((d(p.cn, q.cn) + t.sn * t.dn).abs() < 1e-8);
                assert!((d(p.dn, q.dn) + k * k * t.sn * t.cn).abs() < 1e-8);
                let dd = (p.sn - 2.0 * t.sn + q.sn) / (h * h);
                let res = dd + (1.0 + k * k) * t.sn - 2.0 * k * k * t.sn.powi(3);
                assert!(res.abs() < 1e-4, "jode residual {res}");
            }
        }
    }

    #[test]
    fn jacobi_second_order_ode_with_wider_step() {
        // The second difference with h = 1e-3 keeps truncation and roundoff below 1e-6.
        let h = 1e-3;
        for &k in &[0.2, 0.6, 0.95] {
            let m = km(k);
            for i in 0..40 {
                let x = 0.37 * i as f64;
                let s = |y: f64| jacobi(y, m).sn;
                let dd = (-s(x + 2.0 * h) + 16.0 * s(x + h) - 30.0 * s(x) + 16.0 * s(x - h)
                    - s(x - 2.0 * h))
                    / (12.0 * h * h);
                let res = dd + (1.0 + k * k) * s(x) - 2.0 * k * k * s(x).powi(3);
                assert!(res.abs() < 1e-6, "residual {res} at k={k}, x={x}");
            }
        }
    }

    #[test]
    fn jacobi_periodicity_and_symmetry() {
        for &k in &[0.3, 0.8] {
            let m = km(k);
            let kk = complete_k(m).unwrap();
            for i in 0..30 {
                let x = 0.41 * i as f64 - 5.0;
                let a = jacobi(x, m);
                let b = jacobi(x + 4.0 * kk, m);
                let n = jacobi(-x, m);
                let h = jacobi(x + 2.0 * kk, m);
                assert!((a.sn - b.sn).abs() < 1e-13 && (a.cn - b.cn).abs() < 1e-13);
                assert!((a.dn - h.dn).abs() < 1e-13);
                assert_eq!(n.sn, -a.sn);
                assert_eq!(n.cn, a.cn);
            }
        }
    }

    #[test]
    fn incomplete_e_values() {
        for &k in &[0.2, 0.6, 0.99] {
            let m = km(k);
            let (kk, ee) = complete_ke(m).unwrap();
            assert_eq!(incomplete_e(0.0, m), 0.0);
            assert!((incomplete_e(2.0 * kk, m) - 2.0 * ee).abs() < 1e-14);
            assert!((incomplete_e(kk, m) - ee).abs() < 1e-13);
        }
        let e = incomplete_e(1.3, km(0.6));
        assert!((e - simpson_e(1.3, 0.6)).abs() < 1e-13);
        assert!((e - 1.122_652_550_721_463_7).abs() < 1e-14);
    }

    #[test]
    fn incomplete_e_odd_and_quasi_periodic() {
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let xi = 40.0 * next() - 20.0;
            let k = 0.98 * next() + 0.01;
            let m = km(k);
            let (kk, ee) = complete_ke(m).unwrap();
            let lhs = incomplete_e(xi + 2.0 * kk, m);
            assert!((lhs - incomplete_e(xi, m) - 2.0 * ee).abs() < 1e-12);
            assert!((incomplete_e(-xi, m) + incomplete_e(xi, m)).abs() < 1e-13);
        }
    }
}
