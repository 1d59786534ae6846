//! The cnoidal wave family `u0(x) = sqrt(1 - ee) sn(x sqrt((1 + ee)/2), k)`.
//!
//! `ee` is the only free parameter. The modulus, the half-period `t0`, and
//! the scale `ell = pi / t0` are derived from it. `ee = 0` is the black
//! soliton `tanh(x / sqrt 2)` with `t0 = inf`; `ee = 1` is the zero wave.

use serde::Serialize;

use crate::elliptic::{complete_ke, jacobi, EllipticModulus};
use crate::error::{domain, Error, Result};

/// One member of the cnoidal family. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveFamily {
    ee: f64,
    #[serde(serialize_with = "ser_modulus")]
    k: EllipticModulus,
    ell: f64,
    t0: f64,
    amp: f64,
    /// Argument scale `sqrt((1 + ee)/2)` of `sn`.
    rate: f64,
    /// Complete integrals `K(k)`, `E(k)`; `K = inf` in the soliton limit.
    big_k: f64,
    big_e: f64,
}

fn ser_modulus<S: serde::Serializer>(
    k: &EllipticModulus,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(k.k())
}

impl WaveFamily {
    /// Family member for `0 <= ee < 1`; `ee = 0` is the black-soliton limit.
    pub fn from_ee(ee: f64) -> Result<Self> {
        if !(ee.is_finite() && (0.0..1.0).contains(&ee)) {
            return Err(domain("ee", ee, "0 <= ee < 1"));
        }
        let rate = ((1.0 + ee) / 2.0).sqrt();
        let amp = (1.0 - ee).sqrt();
        if ee == 0.0 {
            return Ok(Self {
                ee,
                k: EllipticModulus::new(1.0)?,
                ell: 0.0,
                t0: f64::INFINITY,
                amp,
                rate,
                big_k: f64::INFINITY,
                big_e: 1.0,
            });
        }
        let k = EllipticModulus::new(((1.0 - ee) / (1.0 + ee)).sqrt())?;
        let (big_k, big_e) = complete_ke(k)?;
        let t0 = 2.0 * big_k / rate;
        Ok(Self {
            ee,
            k,
            ell: std::f64::consts::PI / t0,
            t0,
            amp,
            rate,
            big_k,
            big_e,
        })
    }

    /// The trivial member `ee = 1` (`u0 = 0`, `k = 0`, `t0 = pi`). Used as the
    /// constant-coefficient reference for the operators.
    pub fn zero_wave() -> Self {
        let k = EllipticModulus::new(0.0).expect("0 is a valid modulus");
        let big_k = std::f64::consts::FRAC_PI_2;
        Self {
            ee: 1.0,
            k,
            ell: 1.0,
            t0: std::f64::consts::PI,
            amp: 0.0,
            rate: 1.0,
            big_k,
            big_e: big_k,
        }
    }

    pub fn ee(&self) -> f64 {
        self.ee
    }
    pub fn modulus(&self) -> EllipticModulus {
        self.k
    }
    pub fn k(&self) -> f64 {
        self.k.k()
    }
    pub fn ell(&self) -> f64 {
        self.ell
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn amp(&self) -> f64 {
        self.amp
    }
    /// Scale of the `sn` argument, `sqrt((1 + ee)/2)`.
    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn complete_k(&self) -> f64 {
        self.big_k
    }
    pub fn complete_e(&self) -> f64 {
        self.big_e
    }
    /// Fundamental period `2 t0` of `u0`.
    pub fn period(&self) -> f64 {
        2.0 * self.t0
    }

    /// Number of wave periods in `length` when it is a whole number of them
    /// (relative tolerance `1e-9`).
    pub fn periods_in(&self, length: f64) -> Option<usize> {
        if self.is_soliton_limit() || !(length > 0.0) {
            return None;
        }
        let ratio = length / self.period();
        let n = ratio.round();
        (n >= 1.0 && (ratio - n).abs() <= 1e-9 * ratio).then_some(n as usize)
    }

    pub fn is_soliton_limit(&self) -> bool {
        self.ee == 0.0
    }

    /// Guard for operations that need a finite period.
    pub fn require_periodic(&self) -> Result<()> {
        if self.is_soliton_limit() {
            Err(Error::SolitonLimit)
        } else {
            Ok(())
        }
    }
}

/// Constructor with the library's naming.
pub fn family_from_ee(ee: f64) -> Result<WaveFamily> {
    WaveFamily::from_ee(ee)
}

/// `u0(x)`.
pub fn profile(w: &WaveFamily, x: f64) -> f64 {
    w.amp * jacobi(w.rate * x, w.k).sn
}

/// `(u0, u0', u0'')`, with `u0''` taken from the wave equation.
pub fn profile_derivatives(w: &WaveFamily, x: f64) -> (f64, f64, f64) {
    let t = jacobi(w.rate * x, w.k);
    let u = w.amp * t.sn;
    let du = w.amp * w.rate * t.cn * t.dn;
    (u, du, -(1.0 - u * u) * u)
}

/// `(u0')^2 - ((1 - u0^2)^2 - ee^2)/2`; vanishes on the exact profile.
pub fn first_integral_residual(w: &WaveFamily, x: f64) -> f64 {
    let (u, du, _) = profile_derivatives(w, x);
    du * du - 0.5 * ((1.0 - u * u).powi(2) - w.ee * w.ee)
}

/// The black soliton `tanh(x / sqrt 2)`.
pub fn black_soliton(x: f64) -> f64 {
    (x * std::f64::consts::FRAC_1_SQRT_2).tanh()
}

/// Departures from the small-amplitude law with `a = sqrt(1 - ee)`:
/// `max |U(z) - a sin z|` over `n` points of `[0, 2 pi)`, where
/// `U(z) = u0(z / ell)`, and `|ell^2 - (1 - 3a^2/4)|`.
pub fn small_amplitude_defects(w: &WaveFamily, n: usize) -> Result<(f64, f64)> {
    w.require_periodic()?;
    if n == 0 {
        return Err(domain("n", 0.0, "n >= 1"));
    }
    let a = w.amp;
    let ell = w.ell();
    let sup = (0..n)
        .map(|j| {
            let z = std::f64::consts::TAU * j as f64 / n as f64;
            (profile(w, z / ell) - a * z.sin()).abs()
        })
        .fold(0.0, f64::max);
    Ok((sup, (ell * ell - (1.0 - 0.75 * a * a)).abs()))
}

/// Samples of the level set of the first integral in the `(u0, u0')` plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOrbit {
    pub points: Vec<(f64, f64)>,
    /// Set for `ee = 0`: the orbit connects the saddles `(-1, 0)` and `(1, 0)`.
    pub heteroclinic: bool,
}

/// Half-width of the window used to sample the heteroclinic orbit.
const HETEROCLINIC_HALF_WIDTH: f64 = 30.0;

/// `n` samples over one full period, first and last at the same phase. For
/// the soliton limit the orbit is sampled over `[-30, 30]`.
pub fn phase_orbit(w: &WaveFamily, n: usize) -> Result<PhaseOrbit> {
    if n < 2 {
        return Err(domain("n", n as f64, "n >= 2"));
    }
    let (start, span) = if w.is_soliton_limit() {
        (-HETEROCLINIC_HALF_WIDTH, 2.0 * HETEROCLINIC_HALF_WIDTH)
    } else {
        (0.0, w.period())
    };
    let points = (0..n)
        .map(|j| {
            let x = start + span * j as f64 / (n - 1) as f64;
            let (u, du, _) = profile_derivatives(w, x);
            (u, du)
        })
        .collect();
    Ok(PhaseOrbit {
        points,
        heteroclinic: w.is_soliton_limit(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::complete_k;
    use std::f64::consts::PI;

    #[test]
    fn small_amplitude_law() {
        for ee in [1.0 - 1e-4, 1.0 - 1e-2, 0.96] {
            let w = family_from_ee(ee).unwrap();
            let a = w.amp();
            let (sup, dl) = small_amplitude_defects(&w, 512).unwrap();
            assert!(sup <= 10.0 * a.powi(3), "{ee}: {sup}");
            assert!(dl <= 10.0 * a.powi(4), "{ee}: {dl}");
        }
        // The cubic term is really there: the defect scales like a^3.
        let d = |ee: f64| {
            small_amplitude_defects(&family_from_ee(ee).unwrap(), 512)
                .unwrap()
                .0
        };
        let ratio = d(1.0 - 1e-2) / d(1.0 - 4e-2);
        assert!((ratio - 0.125).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn parameter_maps() {
        let w = family_from_ee(0.8).unwrap();
        assert!((w.k() - 1.0 / 3.0).abs() < 1e-14);
        let kk = complete_k(EllipticModulus::new(1.0 / 3.0).unwrap()).unwrap();
        assert!((w.t0() - 2.0 * (2.0f64 / 1.8).sqrt() * kk).abs() < 1e-12);
        assert!((w.ell() * w.t0() - PI).abs() < 1e-14);
        let near = family_from_ee(1.0 - 1e-8).unwrap();
        assert!((near.t0() - PI).abs() < 1e-3);
        let sol = family_from_ee(0.0).unwrap();
        assert!(sol.is_soliton_limit() && sol.t0().is_infinite() && sol.k() == 1.0);
        assert!(matches!(sol.require_periodic(), Err(Error::SolitonLimit)));
        assert!(family_from_ee(1.0).is_err() && family_from_ee(-0.1).is_err());
    }

    #[test]
    fn family_invariants_on_grid() {
        let mut prev = f64::INFINITY;
        for i in 1..=50 {
            let ee = i as f64 / 51.0;
            let w = family_from_ee(ee).unwrap();
            let k = ((1.0 - ee) / (1.0 + ee)).sqrt();
            assert!((w.k() - k).abs() < 1e-14);
            let kk = complete_k(w.modulus()).unwrap();
            assert!((2.0 * w.t0() - 4.0 * (2.0 / (1.0 + ee)).sqrt() * kk).abs() < 1e-12);
            assert!(w.t0() < prev);
            prev = w.t0();
        }
        let z = WaveFamily::zero_wave();
        assert_eq!((z.t0(), z.ell(), z.amp()), (PI, 1.0, 0.0));
    }

    #[test]
    fn profile_values() {
        let w = family_from_ee(0.8).unwrap();
        assert_eq!(profile(&w, 0.0), 0.0);
        assert!(profile(&w, w.t0()).abs() < 1e-14);
        // Reference values from an independent Jacobi-function implementation.
        let w = family_from_ee(0.5).unwrap();
        assert!((profile(&w, 1.0) - 0.524_247_713_969_595_2).abs() < 1e-14);
        let (_, du, _) = profile_derivatives(&w, 0.3);
        assert!((du - 0.585_471_735_445_032_6).abs() < 1e-14);
        for &ee in &[0.2, 0.5, 0.9] {
            let w = family_from_ee(ee).unwrap();
            let (_, du, _) = profile_derivatives(&w, 0.0);
            assert!((du - ((1.0 - ee * ee) / 2.0).sqrt()).abs() < 1e-15);
        }
    }

    /// RK4 on `u'' = -(1 - u^2) u` from `(0, sqrt((1 - ee^2)/2))`.
    fn ode_profile(ee: f64, x: f64) -> f64 {
        let steps = 20_000;
        let h = x / steps as f64;
        let f = |y: [f64; 2]| [y[1], -(1.0 - y[0] * y[0]) * y[0]];
        let mut y = [0.0, ((1.0 - ee * ee) / 2.0).sqrt()];
        for _ in 0..steps {
            let k1 = f(y);
            let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
            y = [
                y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
        }
        y[0]
    }

    #[test]
    fn profile_matches_ode_integration() {
        for &(ee, x) in &[(0.5, 1.0), (0.2, 3.7), (0.9, 2.2)] {
            let w = family_from_ee(ee).unwrap();
            assert!((profile(&w, x) - ode_profile(ee, x)).abs() < 1e-11);
        }
    }

    #[test]
    fn derivative_by_richardson() {
        let w = family_from_ee(0.5).unwrap();
        let d = |h: f64| (profile(&w, 0.3 + h) - profile(&w, 0.3 - h)) / (2.0 * h);
        let rich = (4.0 * d(1e-3) - d(2e-3)) / 3.0;
        let (_, du, _) = profile_derivatives(&w, 0.3);
        assert!((du - rich).abs() < 1e-10);
    }

    #[test]
    fn first_integral_holds() {
        for &(ee, x) in &[(0.4, 2.7), (0.3, 0.0), (0.9, 0.0)] {
            let w = family_from_ee(ee).unwrap();
            assert!(first_integral_residual(&w, x).abs() < 1e-12);
        }
        let w = family_from_ee(0.8).unwrap();
        assert!(first_integral_residual(&w, 5.0 * w.t0()).abs() < 1e-10);
        let w = family_from_ee(0.4).unwrap();
        for i in 0..200 {
            assert!(first_integral_residual(&w, -20.0 + 0.2 * i as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn periodicity_and_oddness() {
        let mut s = 7u64;
        for i in 1..=9 {
            let w = family_from_ee(i as f64 / 10.0).unwrap();
            for _ in 0..100 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                let x = ((s >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 50.0;
                assert!((profile(&w, x + w.period()) - profile(&w, x)).abs() < 1e-11);
                assert_eq!(profile(&w, -x), -profile(&w, x));
                assert!(profile(&w, x).abs() <= w.amp() + 1e-15);
            }
        }
    }

    #[test]
    fn soliton_limit_profile() {
        let w = family_from_ee(0.0).unwrap();
        for &x in &[-3.0, 0.4, 2.5] {
            assert!((profile(&w, x) - black_soliton(x)).abs() < 1e-15);
        }
        assert_eq!(black_soliton(0.0), 0.0);
        assert!((black_soliton(50.0) - 1.0).abs() < 1e-15);
        let x = 2f64.sqrt() * 0.5f64.atanh();
        assert!((black_soliton(x) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn phase_orbits() {
        let w = family_from_ee(0.4).unwrap();
        let o = phase_orbit(&w, 4).unwrap();
        assert_eq!(o.points[0].0, 0.0);
        assert!((o.points[0].1 - ((1.0 - 0.16) / 2.0f64).sqrt()).abs() < 1e-15);
        let w = family_from_ee(0.8).unwrap();
        let o = phase_orbit(&w, 256).unwrap();
        let (a, b) = (o.points[0], o.points[255]);
        assert!((a.0 - b.0).abs() < 1e-8 && (a.1 - b.1).abs() < 1e-8);
        for &(u, du) in &o.points {
            assert!((du * du - 0.5 * ((1.0 - u * u).powi(2) - 0.64)).abs() < 1e-10);
        }
        let o = phase_orbit(&family_from_ee(0.0).unwrap(), 256).unwrap();
        assert!(o.heteroclinic);
        let (a, b) = (o.points[0], o.points[255]);
        assert!((a.0 + 1.0).abs() < 1e-12 && (b.0 - 1.0).abs() < 1e-12 && a.1.abs() < 1e-12);
        assert!(phase_orbit(&w, 1).is_err());
    }
}
