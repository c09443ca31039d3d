//! The three-dimensional border-collision normal form.
//!
//! Both pieces are companion matrices: the first column holds
//! `(tau, -sigma, delta)` and the superdiagonal holds ones, so each piece has
//! characteristic polynomial `λ³ - τλ² + σλ - δ`. The offset and switching
//! normal are both `e1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::{Matrix, Vector};
use crate::pwlmap::PwlMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcnfParams {
    pub tau_l: f64,
    pub sigma_l: f64,
    pub delta_l: f64,
    pub tau_r: f64,
    pub sigma_r: f64,
    pub delta_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    A,
    B,
    C,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::A, Preset::B, Preset::C];

    /// Parameter values as published, in the order
    /// `tau_L, sigma_L, delta_L, tau_R, sigma_R, delta_R`.
    pub fn decimals(self) -> [&'static str; 6] {
        match self {
            Preset::A => ["0", "-1", "0.3", "0", "3", "0.6"],
            Preset::B => ["1.5", "0", "0.5", "0", "1.5", "0.5"],
            Preset::C => ["0.7228540306", "-1", "-0.2", "-1.5", "2", "-0.2"],
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Preset::A),
            "B" => Ok(Preset::B),
            "C" => Ok(Preset::C),
            other => Err(format!("unknown preset {other:?}; expected A, B or C")),
        }
    }
}

impl BcnfParams {
    pub fn preset(preset: Preset) -> Self {
        let [a, b, c, d, e, f] = preset.decimals().map(|s| s.parse::<f64>().unwrap());
        BcnfParams {
            tau_l: a,
            sigma_l: b,
            delta_l: c,
            tau_r: d,
            sigma_r: e,
            delta_r: f,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.tau_l,
            self.sigma_l,
            self.delta_l,
            self.tau_r,
            self.sigma_r,
            self.delta_r,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }

    fn companion(tau: f64, sigma: f64, delta: f64) -> Matrix {
        Matrix::from_rows(&[[tau, 1.0, 0.0], [-sigma, 0.0, 1.0], [delta, 0.0, 0.0]])
            .expect("companion matrix entries must be finite")
    }

    pub fn left_matrix(&self) -> Matrix {
        Self::companion(self.tau_l, self.sigma_l, self.delta_l)
    }

    pub fn right_matrix(&self) -> Matrix {
        Self::companion(self.tau_r, self.sigma_r, self.delta_r)
    }

    /// The normal-form map. Panics if a parameter is not finite.
    pub fn build(&self) -> PwlMap {
        PwlMap::new(
            self.left_matrix(),
            self.right_matrix(),
            Vector::unit(3, 0),
            Vector::unit(3, 0),
        )
        .expect("the normal form differs by a rank-one term in the first column")
    }
}

/// Result of iterating a map from one initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub points: Vec<Vector>,
    /// Iterate index at which the norm first exceeded the bail-out bound.
    pub diverged_at: Option<usize>,
}

/// Iterates `map` from `x0`, discards `transient` iterates, and keeps the
/// following `keep`. Stops early once an iterate's norm exceeds `bailout`.
pub fn simulate(map: &PwlMap, x0: &Vector, transient: usize, keep: usize, bailout: f64) -> Orbit {
    let mut points = Vec::with_capacity(keep);
    let mut x = x0.clone();
    for i in 0..transient + keep {
        x = map.evaluate(&x);
        if !(x.norm() <= bailout) {
            return Orbit {
                points,
                diverged_at: Some(i + 1),
            };
        }
        if i >= transient {
            points.push(x.clone());
        }
    }
    Orbit {
        points,
        diverged_at: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::pwlmap::Word;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_parameters_give_shift_matrix() {
        let p = BcnfParams {
            tau_l: 0.0,
            sigma_l: 0.0,
            delta_l: 0.0,
            tau_r: 0.0,
            sigma_r: 0.0,
            delta_r: 0.0,
        };
        let shift = Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]).unwrap();
        let m = p.build();
        assert_eq!(*m.a_left(), shift);
        assert_eq!(*m.a_right(), shift);
    }

    #[test]
    fn preset_values() {
        assert_eq!(BcnfParams::preset(Preset::A).as_array(), [0.0, -1.0, 0.3, 0.0, 3.0, 0.6]);
        assert_eq!(BcnfParams::preset(Preset::B).as_array(), [1.5, 0.0, 0.5, 0.0, 1.5, 0.5]);
        assert_eq!(
            BcnfParams::preset(Preset::C).as_array(),
            [0.7228540306, -1.0, -0.2, -1.5, 2.0, -0.2]
        );
        let a = BcnfParams::preset(Preset::A).build();
        assert_eq!(a.a_right().row(1), &[-3.0, 0.0, 1.0]);
        assert_eq!(a.a_left().row(2), &[0.3, 0.0, 0.0]);
    }

    #[test]
    fn presets_are_continuous_and_invertible() {
        for (preset, product) in [(Preset::A, 0.18), (Preset::B, 0.25), (Preset::C, 0.04)] {
            let m = BcnfParams::preset(preset).build();
            assert!(m.continuity_defect() <= 1e-10);
            assert!((m.det_product() - product).abs() < 1e-12);
            assert!(m.is_invertible());
        }
    }

    #[test]
    fn determinants_and_characteristic_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let p = BcnfParams {
                tau_l: rng.gen_range(-2.0..2.0),
                sigma_l: rng.gen_range(-2.0..2.0),
                delta_l: rng.gen_range(-1.0..1.0),
                tau_r: rng.gen_range(-2.0..2.0),
                sigma_r: rng.gen_range(-2.0..2.0),
                delta_r: rng.gen_range(-1.0..1.0),
            };
            for (m, (tau, sigma, delta)) in [
                (p.left_matrix(), (p.tau_l, p.sigma_l, p.delta_l)),
                (p.right_matrix(), (p.tau_r, p.sigma_r, p.delta_r)),
            ] {
                // cofactor expansion along the last row: delta * det[[1,0],[0,1]]
                assert!((m.determinant() - delta).abs() < 1e-12);
                let ev = linalg::eigenvalues(&m).unwrap();
                let sum: num_complex::Complex64 = ev.iter().sum();
                let pairs = ev[0] * ev[1] + ev[0] * ev[2] + ev[1] * ev[2];
                let prod = ev[0] * ev[1] * ev[2];
                assert!((sum.re - tau).abs() < 1e-9 && sum.im.abs() < 1e-9);
                assert!((pairs.re - sigma).abs() < 1e-9);
                assert!((prod.re - delta).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn simulate_fixed_point_is_constant() {
        let m = BcnfParams::preset(Preset::A).build();
        let y = m.find_cycle(&"R".parse::<Word>().unwrap()).unwrap().points[0].clone();
        let orbit = simulate(&m, &y, 0, 20, 1e6);
        assert_eq!(orbit.diverged_at, None);
        // a saddle amplifies rounding by about 1.74 per step
        for x in &orbit.points {
            assert!(x.distance(&y) < 1e-9);
        }
    }

    #[test]
    fn simulate_keep_zero() {
        let m = BcnfParams::preset(Preset::A).build();
        let orbit = simulate(&m, &Vector::zeros(3), 10, 0, 1e6);
        assert!(orbit.points.is_empty());
    }

    #[test]
    fn preset_parsing() {
        assert_eq!("b".parse::<Preset>().unwrap(), Preset::B);
        assert!("D".parse::<Preset>().is_err());
    }
}
