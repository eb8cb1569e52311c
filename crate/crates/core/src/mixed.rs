//! Distributions over thresholds: finitely many atoms plus density pieces of
//! the forms `c/(1-z)` and `c/(1-z)^2`. Both forms have closed-form CDFs and
//! inverse CDFs, so sampling needs no quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PersuasionError, Result};

/// Tolerance on the total mass of a mixed threshold.
pub const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityForm {
    /// `coef / (1 - z)`
    InverseLinear,
    /// `coef / (1 - z)^2`
    InverseSquare,
}

impl DensityForm {
    /// Exponent `k` such that the density is `coef * (1 - z)^k`.
    pub fn exponent(self) -> i32 {
        match self {
            DensityForm::InverseLinear => -1,
            DensityForm::InverseSquare => -2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub at: f64,
    pub weight: f64,
}

/// Density `coef * form(z)` on `[lo, hi]`, with `hi < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub coef: f64,
    pub form: DensityForm,
}

impl DensityPiece {
    pub fn density(&self, z: f64) -> f64 {
        if z < self.lo || z > self.hi {
            return 0.0;
        }
        let w = 1.0 - z;
        match self.form {
            DensityForm::InverseLinear => self.coef / w,
            DensityForm::InverseSquare => self.coef / (w * w),
        }
    }

    /// Mass on `[lo, min(z, hi)]`.
    pub fn mass_below(&self, z: f64) -> f64 {
        if z <= self.lo {
            return 0.0;
        }
        let top = z.min(self.hi);
        let (w0, w1) = (1.0 - self.lo, 1.0 - top);
        match self.form {
            DensityForm::InverseLinear => self.coef * (w0 / w1).ln(),
            DensityForm::InverseSquare => self.coef * (1.0 / w1 - 1.0 / w0),
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass_below(self.hi)
    }

    /// The point `z` in the piece where the mass accumulated from `lo`
    /// reaches `r`.
    fn invert(&self, r: f64) -> f64 {
        let w0 = 1.0 - self.lo;
        let z = match self.form {
            DensityForm::InverseLinear => 1.0 - w0 * (-r / self.coef).exp(),
            DensityForm::InverseSquare => 1.0 - 1.0 / (r / self.coef + 1.0 / w0),
        };
        z.clamp(self.lo, self.hi)
    }
}

/// A probability distribution over thresholds in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixed")]
pub struct MixedThreshold {
    atoms: Vec<Atom>,
    pieces: Vec<DensityPiece>,
}

#[derive(Deserialize)]
struct RawMixed {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    pieces: Vec<DensityPiece>,
}

impl TryFrom<RawMixed> for MixedThreshold {
    type Error = PersuasionError;
    fn try_from(raw: RawMixed) -> Result<Self> {
        Self::new(raw.atoms, raw.pieces)
    }
}

fn invalid(msg: impl Into<String>) -> PersuasionError {
    PersuasionError::InvalidDistribution(msg.into())
}

impl MixedThreshold {
    /// Validates and normalizes the layout: atoms and pieces are sorted by
    /// location, zero-weight atoms dropped, and pieces must not overlap.
    pub fn new(mut atoms: Vec<Atom>, mut pieces: Vec<DensityPiece>) -> Result<Self> {
        for a in &atoms {
            if !(a.at.is_finite() && (0.0..=1.0).contains(&a.at)) {
                return Err(invalid(format!("atom location {} outside [0, 1]", a.at)));
            }
            if !(a.weight.is_finite() && a.weight >= 0.0) {
                return Err(invalid(format!("atom weight {} is negative", a.weight)));
            }
        }
        for p in &pieces {
            if !(p.lo.is_finite() && p.hi.is_finite() && 0.0 <= p.lo && p.lo < p.hi && p.hi < 1.0) {
                return Err(invalid(format!(
                    "density piece [{}, {}] must satisfy 0 <= lo < hi < 1",
                    p.lo, p.hi
                )));
            }
            if !(p.coef.is_finite() && p.coef >= 0.0) {
                return Err(invalid(format!("density coefficient {} is negative", p.coef)));
            }
        }
        atoms.retain(|a| a.weight > 0.0);
        atoms.sort_by(|a, b| a.at.total_cmp(&b.at));
        pieces.retain(|p| p.coef > 0.0);
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        if pieces.windows(2).any(|w| w[1].lo < w[0].hi) {
            return Err(invalid("density pieces overlap"));
        }
        let m = Self { atoms, pieces };
        let total = m.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(invalid(format!("total mass is {total}, expected 1")));
        }
        Ok(m)
    }

    pub fn point(at: f64) -> Result<Self> {
        Self::new(vec![Atom { at, weight: 1.0 }], Vec::new())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum::<f64>()
            + self.pieces.iter().map(DensityPiece::mass).sum::<f64>()
    }

    /// Right-continuous CDF.
    pub fn cdf(&self, z: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.at <= z).map(|a| a.weight).sum();
        let dens: f64 = self.pieces.iter().map(|p| p.mass_below(z)).sum();
        (atoms + dens).min(1.0)
    }

    /// Density of the continuous part at `z`.
    pub fn density(&self, z: f64) -> f64 {
        self.pieces.iter().map(|p| p.density(z)).sum()
    }

    /// Weight of the atom at exactly `z`.
    pub fn atom_weight(&self, z: f64) -> f64 {
        self.atoms.iter().filter(|a| a.at == z).map(|a| a.weight).sum()
    }

    /// Smallest and largest point of the support.
    pub fn support(&self) -> (f64, f64) {
        let lo = self
            .atoms
            .iter()
            .map(|a| a.at)
            .chain(self.pieces.iter().map(|p| p.lo))
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .atoms
            .iter()
            .map(|a| a.at)
            .chain(self.pieces.iter().map(|p| p.hi))
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Generalized inverse `inf { z : F(z) >= u }`.
    pub fn quantile(&self, u: f64) -> f64 {
        // Pieces do not overlap, so walking atoms and pieces in order of
        // location visits the mass in CDF order. An atom sitting strictly
        // inside a piece splits it.
        let mut acc = 0.0;
        let mut atoms = self.atoms.iter().peekable();
        for piece in &self.pieces {
            while let Some(a) = atoms.next_if(|a| a.at <= piece.lo) {
                acc += a.weight;
                if u <= acc {
                    return a.at;
                }
            }
            let mut from = piece.lo;
            loop {
                let next_atom = atoms.peek().filter(|a| a.at < piece.hi).copied();
                let to = next_atom.map_or(piece.hi, |a| a.at);
                let seg = piece.mass_below(to) - piece.mass_below(from);
                if seg > 0.0 && u <= acc + seg {
                    let r = piece.mass_below(from) + (u - acc);
                    return piece.invert(r.max(0.0));
                }
                acc += seg;
                match next_atom {
                    Some(a) => {
                        atoms.next();
                        acc += a.weight;
                        if u <= acc {
                            return a.at;
                        }
                        from = a.at;
                    }
                    None => break,
                }
            }
        }
        for a in atoms {
            acc += a.weight;
            if u <= acc {
                return a.at;
            }
        }
        // Rounding left `acc` a hair below 1.
        self.support().1
    }

    /// One draw via the inverse-CDF transform; reproducible given `seed`.
    pub fn sample(&self, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.quantile(rng.random::<f64>())
    }

    /// `n` draws from a single seeded stream.
    pub fn sample_n(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.quantile(rng.random::<f64>())).collect()
    }
}

/// One draw from `m` using `seed`.
pub fn sample_mixed(m: &MixedThreshold, seed: u64) -> f64 {
    m.sample(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn log_density(lo: f64, hi: f64, coef: f64) -> DensityPiece {
        DensityPiece { lo, hi, coef, form: DensityForm::InverseLinear }
    }

    #[test]
    fn point_mass_always_returns_location() {
        let m = MixedThreshold::point(0.4).unwrap();
        for seed in 0..20 {
            assert_eq!(m.sample(seed), 0.4);
        }
        assert_eq!(m.quantile(0.0), 0.4);
        assert_eq!(m.quantile(1.0), 0.4);
    }

    #[test]
    fn pure_log_density_quantile() {
        let m = MixedThreshold::new(vec![], vec![log_density(0.0, 1.0 - 1.0 / E, 1.0)]).unwrap();
        assert_eq!(m.quantile(0.0), 0.0);
        assert!((m.quantile(1.0) - (1.0 - 1.0 / E)).abs() < 1e-15);
        for u in [0.1, 0.5, 0.9] {
            assert!((m.quantile(u) - (1.0 - (-u).exp())).abs() < 1e-14);
            assert!((m.cdf(m.quantile(u)) - u).abs() < 1e-14);
        }
    }

    #[test]
    fn atom_at_piece_end() {
        let a = 0.5_f64;
        let m = MixedThreshold::new(
            vec![Atom { at: 1.0 - a, weight: 1.0 + a.ln() }],
            vec![log_density(0.0, 1.0 - a, 1.0)],
        )
        .unwrap();
        let dens = -a.ln();
        assert_eq!(m.quantile(dens + 1e-9), 0.5);
        assert_eq!(m.quantile(1.0), 0.5);
        assert!(m.quantile(dens - 1e-9) < 0.5);
        assert!((m.cdf(0.5) - 1.0).abs() < 1e-15);
        assert!((m.cdf(0.5 - 1e-12) - dens).abs() < 1e-9);
    }

    #[test]
    fn atom_inside_piece_splits_it() {
        let piece = DensityPiece { lo: 0.0, hi: 0.5, coef: 0.25, form: DensityForm::InverseSquare };
        let m = MixedThreshold::new(vec![Atom { at: 0.2, weight: 0.75 }], vec![piece]).unwrap();
        let below = piece.mass_below(0.2);
        assert!((m.quantile(below + 0.1) - 0.2).abs() < 1e-15);
        let q = m.quantile(below + 0.75 + 0.01);
        assert!(q > 0.2 && (m.cdf(q) - (below + 0.76)).abs() < 1e-12);
        let q = m.quantile(below / 2.0);
        assert!((m.cdf(q) - below / 2.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(MixedThreshold::point(1.5).is_err());
        assert!(MixedThreshold::new(vec![Atom { at: 0.1, weight: 0.5 }], vec![]).is_err());
        let overlap = vec![log_density(0.0, 0.5, 0.5), log_density(0.4, 0.6, 0.5)];
        assert!(MixedThreshold::new(vec![], overlap).is_err());
        assert!(MixedThreshold::new(vec![], vec![log_density(0.5, 1.0, 1.0)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = MixedThreshold::new(
            vec![Atom { at: 0.0, weight: 0.5 }],
            vec![DensityPiece { lo: 0.0, hi: 0.5, coef: 0.5, form: DensityForm::InverseSquare }],
        )
        .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("inverse_square"));
        let back: MixedThreshold = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<MixedThreshold>(r#"{"atoms":[{"at":0.2,"weight":0.3}]}"#).is_err());
    }
}
