//! Payoff kernels of the threshold games and their exact expectations under
//! mixed thresholds.
//!
//! Both kernels are products `phi(1-x) * psi(1-y) * 1{y >= x}` plus, for the
//! regret kernel, a term in `x` alone. In the variable `w = 1 - z` the two
//! density forms are powers of `w`, so every expectation reduces to
//! integrals of `w^p (ln w)^q`, which have exact antiderivatives.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PersuasionError, Result};
use crate::mixed::MixedThreshold;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coef: f64,
    p: i32,
    q: u32,
}

/// Finite sums of `coef * w^p * (ln w)^q`.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct LogPoly {
    terms: Vec<Term>,
}

impl LogPoly {
    pub(crate) fn monomial(coef: f64, p: i32) -> Self {
        Self { terms: vec![Term { coef, p, q: 0 }] }
    }

    pub(crate) fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(*t);
        }
        out
    }

    pub(crate) fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for a in &self.terms {
            for b in &other.terms {
                out.push(Term { coef: a.coef * b.coef, p: a.p + b.p, q: a.q + b.q });
            }
        }
        out
    }

    fn push(&mut self, t: Term) {
        match self.terms.iter_mut().find(|s| s.p == t.p && s.q == t.q) {
            Some(s) => s.coef += t.coef,
            None => self.terms.push(t),
        }
    }

    fn scale(mut self, c: f64) -> Self {
        for t in &mut self.terms {
            t.coef *= c;
        }
        self
    }

    /// An antiderivative in `w`.
    pub(crate) fn antiderivative(&self) -> Self {
        let mut out = Self::default();
        for t in &self.terms {
            for s in antiderivative_term(t.p, t.q).terms {
                out.push(Term { coef: s.coef * t.coef, ..s });
            }
        }
        out
    }

    pub(crate) fn eval(&self, w: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                if w == 0.0 && t.p > 0 {
                    // w^p (ln w)^q -> 0 as w -> 0 for p > 0.
                    return 0.0;
                }
                let mut v = t.coef * w.powi(t.p);
                if t.q > 0 {
                    v *= w.ln().powi(t.q as i32);
                }
                v
            })
            .sum()
    }

    /// `int_lo^hi self(w) dw`, zero when the interval is empty.
    pub(crate) fn integrate(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let a = self.antiderivative();
        a.eval(hi) - a.eval(lo)
    }
}

fn antiderivative_term(p: i32, q: u32) -> LogPoly {
    if p == -1 {
        return LogPoly { terms: vec![Term { coef: 1.0 / (q + 1) as f64, p: 0, q: q + 1 }] };
    }
    let k = (p + 1) as f64;
    let mut out = LogPoly { terms: vec![Term { coef: 1.0 / k, p: p + 1, q }] };
    if q > 0 {
        let rest = antiderivative_term(p, q - 1).scale(-(q as f64) / k);
        for t in rest.terms {
            out.push(t);
        }
    }
    out
}

/// A mixed threshold rewritten in `w = 1 - z`.
enum Component {
    Atom { z: f64, w: f64, mass: f64 },
    Piece { w0: f64, w1: f64, density: LogPoly },
}

fn components(m: &MixedThreshold) -> Vec<Component> {
    let atoms = m.atoms().iter().map(|a| Component::Atom { z: a.at, w: 1.0 - a.at, mass: a.weight });
    let pieces = m.pieces().iter().map(|p| Component::Piece {
        w0: 1.0 - p.hi,
        w1: 1.0 - p.lo,
        density: LogPoly::monomial(p.coef, p.form.exponent()),
    });
    atoms.chain(pieces).collect()
}

/// `E[phi(W)]`.
fn expect_one(m: &MixedThreshold, phi: &LogPoly) -> f64 {
    components(m)
        .iter()
        .map(|c| match c {
            Component::Atom { w, mass, .. } => mass * phi.eval(*w),
            Component::Piece { w0, w1, density } => phi.mul(density).integrate(*w0, *w1),
        })
        .sum()
}

/// Integral of `weight(1 - z)` against the continuous part of `m` over
/// `[a, b]`.
pub(crate) fn integrate_density(m: &MixedThreshold, weight: &LogPoly, a: f64, b: f64) -> f64 {
    m.pieces()
        .iter()
        .map(|p| {
            let (lo, hi) = (a.max(p.lo), b.min(p.hi));
            if hi <= lo {
                return 0.0;
            }
            weight.mul(&LogPoly::monomial(p.coef, p.form.exponent())).integrate(1.0 - hi, 1.0 - lo)
        })
        .sum()
}

/// `E[phi(W_X) psi(W_Y) 1{Y >= X}]` for independent `X`, `Y`.
fn expect_joint(x: &MixedThreshold, y: &MixedThreshold, phi: &LogPoly, psi: &LogPoly) -> f64 {
    let xs = components(x);
    let ys = components(y);
    let mut total = 0.0;
    for cx in &xs {
        for cy in &ys {
            total += match (cx, cy) {
                (Component::Atom { z: zx, w: wx, mass: mx }, Component::Atom { z: zy, w: wy, mass: my }) => {
                    if zy >= zx {
                        mx * my * phi.eval(*wx) * psi.eval(*wy)
                    } else {
                        0.0
                    }
                }
                (Component::Atom { w: wx, mass: mx, .. }, Component::Piece { w0, w1, density }) => {
                    // y >= x  <=>  w_y <= w_x
                    mx * phi.eval(*wx) * psi.mul(density).integrate(*w0, w1.min(*wx))
                }
                (Component::Piece { w0, w1, density }, Component::Atom { w: wy, mass: my, .. }) => {
                    my * psi.eval(*wy) * phi.mul(density).integrate(w0.max(*wy), *w1)
                }
                (
                    Component::Piece { w0: a0, w1: a1, density: fx },
                    Component::Piece { w0: b0, w1: b1, density: fy },
                ) => {
                    let inner = phi.mul(fx).antiderivative();
                    let outer = psi.mul(fy);
                    let full = inner.eval(*a1) - inner.eval(*a0);
                    // For w_y below the X piece every x counts.
                    let below = full * outer.integrate(*b0, b1.min(*a0));
                    // Inside it, x ranges over [w_y, a1].
                    let (lo, hi) = (b0.max(*a0), b1.min(*a1));
                    let inside =
                        inner.eval(*a1) * outer.integrate(lo, hi) - outer.mul(&inner).integrate(lo, hi);
                    below + inside
                }
            };
        }
    }
    total
}

/// Which threshold game is being played.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `g(x, y) = (1-x) - (1-y) 1{y >= x}`; the adversary `x` maximizes.
    Regret,
    /// `h(x, y) = (1-y) 1{y >= x} / (1-x)`; the adversary `x` minimizes.
    Ratio,
}

/// One of the two players of a threshold game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    /// The adversary choosing the receiver's threshold.
    X,
    /// The sender choosing the scheme's threshold.
    Y,
}

impl Kernel {
    pub fn payoff(self, x: f64, y: f64) -> f64 {
        let hit = if y >= x { 1.0 - y } else { 0.0 };
        match self {
            Kernel::Regret => (1.0 - x) - hit,
            Kernel::Ratio => hit / (1.0 - x),
        }
    }

    /// Exact expectation of the kernel for independent mixed thresholds.
    pub fn expected(self, x: &MixedThreshold, y: &MixedThreshold) -> Result<f64> {
        let w = LogPoly::monomial(1.0, 1);
        match self {
            Kernel::Regret => {
                let one = LogPoly::monomial(1.0, 0);
                Ok(expect_one(x, &w) - expect_joint(x, y, &one, &w))
            }
            Kernel::Ratio => {
                if x.atoms().iter().any(|a| a.at >= 1.0) {
                    return Err(PersuasionError::OutOfRange { name: "x", value: 1.0, range: "[0, 1)" });
                }
                Ok(expect_joint(x, y, &LogPoly::monomial(1.0, -1), &w))
            }
        }
    }

    /// Whether `player` wants the kernel large.
    pub fn maximizes(self, player: Player) -> bool {
        matches!((self, player), (Kernel::Regret, Player::X) | (Kernel::Ratio, Player::Y))
    }
}

/// A pure best response found by search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub arg: f64,
    pub value: f64,
}

fn pure_value(kernel: Kernel, player: Player, at: f64, opponent: &MixedThreshold) -> f64 {
    let point = MixedThreshold::point(at).expect("location is in [0, 1]");
    let r = match player {
        Player::X => kernel.expected(&point, opponent),
        Player::Y => kernel.expected(opponent, &point),
    };
    r.unwrap_or(f64::NAN)
}

/// Best pure response of `player` against `opponent` over `[lo, hi]`.
///
/// Scans `grid` equally spaced points, refines around the best one by
/// golden-section search, and probes both sides of every opponent atom
/// since the payoff jumps there. Ties go to the lowest location.
pub fn best_response(
    kernel: Kernel,
    player: Player,
    opponent: &MixedThreshold,
    grid: usize,
    lo: f64,
    hi: f64,
) -> Result<BestResponse> {
    if grid < 2 {
        return Err(PersuasionError::OutOfRange { name: "grid", value: grid as f64, range: ">= 2" });
    }
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(PersuasionError::OutOfRange { name: "hi", value: hi, range: "[lo, 1]" });
    }
    if kernel == Kernel::Ratio && player == Player::X && hi >= 1.0 {
        return Err(PersuasionError::OutOfRange { name: "hi", value: hi, range: "[0, 1)" });
    }
    let sign = if kernel.maximizes(player) { 1.0 } else { -1.0 };
    let score = |z: f64| sign * pure_value(kernel, player, z, opponent);
    let step = (hi - lo) / (grid - 1) as f64;
    let points: Vec<f64> = (0..grid).map(|i| if i + 1 == grid { hi } else { lo + step * i as f64 }).collect();
    let scores: Vec<f64> = points.par_iter().map(|&z| score(z)).collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    let mut arg = points[best];
    let mut val = scores[best];
    let mut consider = |z: f64| {
        if (lo..=hi).contains(&z) {
            let s = score(z);
            if s > val {
                val = s;
                arg = z;
            }
        }
    };
    let a = points[best.saturating_sub(1)];
    let b = points[(best + 1).min(grid - 1)];
    for (l, r) in [(a, points[best]), (points[best], b)] {
        if r > l {
            consider(golden_section(&score, l, r));
        }
    }
    for atom in opponent.atoms() {
        for z in [atom.at - 1e-12, atom.at, atom.at + 1e-12] {
            consider(z);
        }
    }
    Ok(BestResponse { arg, value: sign * val })
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if b - a < 1e-14 {
            break;
        }
    }
    if fc >= fd {
        c
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixed::{Atom, DensityForm, DensityPiece};

    /// Composite 5-point Gauss-Legendre; never evaluates the endpoints,
    /// where the integrands below jump.
    fn gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let h = (b - a) / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let mid = a + h * (i as f64 + 0.5);
            for (x, w) in NODES.iter().zip(WEIGHTS) {
                s += w * f(mid + 0.5 * h * x);
            }
        }
        s * 0.5 * h
    }

    #[test]
    fn antiderivatives_differentiate_back() {
        for p in -4..=3 {
            for q in 0..=3u32 {
                let f = LogPoly { terms: vec![Term { coef: 1.0, p, q }] };
                let a = f.antiderivative();
                for w in [0.3, 0.7, 1.4] {
                    let h = 1e-6;
                    let d = (a.eval(w + h) - a.eval(w - h)) / (2.0 * h);
                    assert!((d - f.eval(w)).abs() < 1e-6 * (1.0 + f.eval(w).abs()), "p={p} q={q} w={w}");
                }
            }
        }
    }

    fn mixed(atoms: &[(f64, f64)], pieces: &[(f64, f64, f64, DensityForm)]) -> MixedThreshold {
        MixedThreshold::new(
            atoms.iter().map(|&(at, weight)| Atom { at, weight }).collect(),
            pieces.iter().map(|&(lo, hi, coef, form)| DensityPiece { lo, hi, coef, form }).collect(),
        )
        .unwrap()
    }

    /// Numerical double integral over the continuous parts plus exact atom
    /// sums, as an independent check of the closed forms.
    fn brute(kernel: Kernel, x: &MixedThreshold, y: &MixedThreshold) -> f64 {
        let n = 200;
        let inner = |xv: f64| -> f64 {
            let mut s: f64 = y.atoms().iter().map(|a| a.weight * kernel.payoff(xv, a.at)).sum();
            for p in y.pieces() {
                // Split at the jump y = x.
                let f = |yv: f64| kernel.payoff(xv, yv) * p.density(yv);
                if xv > p.lo && xv < p.hi {
                    s += gauss(&f, p.lo, xv, n) + gauss(&f, xv, p.hi, n);
                } else {
                    s += gauss(&f, p.lo, p.hi, n);
                }
            }
            s
        };
        let mut total: f64 = x.atoms().iter().map(|a| a.weight * inner(a.at)).sum();
        for p in x.pieces() {
            let f = |xv: f64| inner(xv) * p.density(xv);
            let mut cuts = vec![p.lo, p.hi];
            cuts.extend(y.atoms().iter().map(|a| a.at));
            cuts.extend(y.pieces().iter().flat_map(|q| [q.lo, q.hi]));
            cuts.retain(|&c| c >= p.lo && c <= p.hi);
            cuts.sort_by(f64::total_cmp);
            for w in cuts.windows(2) {
                if w[1] > w[0] {
                    total += gauss(&f, w[0], w[1], 50);
                }
            }
        }
        total
    }

    #[test]
    fn closed_form_matches_quadrature() {
        use DensityForm::*;
        let x = mixed(&[(0.0, 0.4)], &[(0.0, 0.45, 0.6 * 0.55 / 0.45, InverseSquare)]);
        let y = mixed(&[(0.3, 0.2)], &[(0.1, 0.6, 0.8 / (0.9f64 / 0.4).ln(), InverseLinear)]);
        for kernel in [Kernel::Regret, Kernel::Ratio] {
            let exact = kernel.expected(&x, &y).unwrap();
            let num = brute(kernel, &x, &y);
            assert!((exact - num).abs() < 1e-6, "{kernel:?}: {exact} vs {num}");
        }
    }

    #[test]
    fn point_masses_reduce_to_payoff() {
        let x = MixedThreshold::point(0.3).unwrap();
        let y = MixedThreshold::point(0.5).unwrap();
        assert!((Kernel::Regret.expected(&x, &y).unwrap() - 0.2).abs() < 1e-15);
        let h = Kernel::Ratio.expected(&x, &y).unwrap();
        assert!((h - 0.5 / 0.7).abs() < 1e-15);
        let one = MixedThreshold::point(1.0).unwrap();
        assert!(Kernel::Ratio.expected(&one, &y).is_err());
    }

    #[test]
    fn best_response_point_opponent() {
        // g(x, 0.6) = 1 - x - 0.4 for x <= 0.6 and 1 - x beyond.
        let y = MixedThreshold::point(0.6).unwrap();
        let br = best_response(Kernel::Regret, Player::X, &y, 101, 0.0, 1.0).unwrap();
        assert_eq!(br.arg, 0.0);
        assert!((br.value - 0.6).abs() < 1e-12);
        // Against y = 0 the supremum 1 is approached from the right of 0.
        let y0 = MixedThreshold::point(0.0).unwrap();
        let br = best_response(Kernel::Regret, Player::X, &y0, 101, 0.0, 1.0).unwrap();
        assert!(br.arg > 0.0 && br.arg < 0.01);
        assert!(br.value > 0.99);
    }

    #[test]
    fn grid_too_small() {
        let y = MixedThreshold::point(0.6).unwrap();
        assert!(best_response(Kernel::Regret, Player::X, &y, 1, 0.0, 1.0).is_err());
    }
}
