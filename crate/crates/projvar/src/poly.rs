//! Homogeneous polynomial utilities: graded-lexicographic monomial bases,
//! evaluation, exact partial derivatives, and small-degree complex root
//! finding for univariate and binary forms.

use crate::error::{ProjvarError, Result};
use crate::numeric::{CVec, C, NORM_FLOOR};

/// Monomials of one fixed total degree in `nvars` variables, listed in
/// graded-lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    nvars: usize,
    degree: usize,
    exponents: Vec<Vec<u32>>,
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree: usize) -> Result<Self> {
        if nvars == 0 {
            return Err(ProjvarError::DimensionMismatch(
                "monomial basis needs at least one variable".into(),
            ));
        }
        let mut exponents = Vec::new();
        let mut current = vec![0u32; nvars];
        enumerate_exponents(nvars, degree as u32, 0, &mut current, &mut exponents);
        Ok(MonomialBasis {
            nvars,
            degree,
            exponents,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponent(&self, index: usize) -> &[u32] {
        &self.exponents[index]
    }

    pub fn index_of(&self, exponent: &[u32]) -> Option<usize> {
        self.exponents.iter().position(|e| e.as_slice() == exponent)
    }

    /// Values of every monomial at a point.
    pub fn eval(&self, point: &CVec) -> Result<CVec> {
        if point.len() != self.nvars {
            return Err(ProjvarError::DimensionMismatch(format!(
                "point of length {} for {} variables",
                point.len(),
                self.nvars
            )));
        }
        let mut out = CVec::zeros(self.len());
        for (i, exps) in self.exponents.iter().enumerate() {
            let mut acc = C::new(1.0, 0.0);
            for (var, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    acc *= point[var];
                }
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Value of a coefficient vector at a point.
    pub fn eval_form(&self, coeffs: &CVec, point: &CVec) -> Result<C> {
        let values = self.eval(point)?;
        let mut acc = C::new(0.0, 0.0);
        for i in 0..values.len() {
            acc += coeffs[i] * values[i];
        }
        Ok(acc)
    }

    /// Coefficients of `∂f/∂x_var` in the basis one degree down.
    pub fn derivative(&self, coeffs: &CVec, var: usize) -> Result<(MonomialBasis, CVec)> {
        if self.degree == 0 {
            let basis = MonomialBasis::new(self.nvars, 0)?;
            return Ok((basis, CVec::zeros(1)));
        }
        let lower = MonomialBasis::new(self.nvars, self.degree - 1)?;
        let mut out = CVec::zeros(lower.len());
        for (i, exps) in self.exponents.iter().enumerate() {
            let e = exps[var];
            if e == 0 {
                continue;
            }
            let mut reduced = exps.clone();
            reduced[var] -= 1;
            let j = lower.index_of(&reduced).expect("reduced exponent in basis");
            out[j] += coeffs[i] * C::new(e as f64, 0.0);
        }
        Ok((lower, out))
    }
}

fn enumerate_exponents(
    nvars: usize,
    remaining: u32,
    var: usize,
    current: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if var == nvars - 1 {
        current[var] = remaining;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e;
        enumerate_exponents(nvars, remaining - e, var + 1, current, out);
        current[var] = 0;
    }
}

/// Roots of `c[0] + c[1] λ + ... + c[d] λ^d` by Durand-Kerner iteration with
/// deterministic starting points. Trailing near-zero leading coefficients are
/// deflated first. Multiple roots converge to clustered values.
pub fn univariate_roots(coeffs: &[C]) -> Vec<C> {
    let scale = coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale <= NORM_FLOOR {
        return Vec::new();
    }
    let mut deg = coeffs.len().saturating_sub(1);
    while deg > 0 && coeffs[deg].norm() <= 1e-13 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let monic: Vec<C> = (0..=deg).map(|i| coeffs[i] / lead).collect();
    // Cauchy-style radius bound for the starting circle.
    let radius = 1.0
        + monic[..deg]
            .iter()
            .map(|x| x.norm())
            .fold(0.0_f64, f64::max);
    let seed = C::new(0.4, 0.9);
    let mut roots: Vec<C> = (0..deg)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * (i as f64 + 0.25) / deg as f64;
            C::new(radius * angle.cos(), radius * angle.sin()) * seed
        })
        .collect();
    let eval = |z: C| -> C {
        let mut acc = C::new(0.0, 0.0);
        for c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    for _ in 0..400 {
        let mut delta_max = 0.0_f64;
        for i in 0..deg {
            let mut denom = C::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() <= NORM_FLOOR {
                denom = C::new(1e-150, 0.0);
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta_max = delta_max.max(step.norm());
        }
        if delta_max < 1e-14 * radius.max(1.0) {
            break;
        }
    }
    roots
}

/// Projective roots `(t : s)` of the binary form
/// `f(t, s) = Σ_j c[j] t^{d-j} s^j`, multiplicity listed by repetition.
/// Roots at `s = 0` appear as `(1, 0)`.
pub fn binary_form_roots(coeffs: &[C]) -> Vec<(C, C)> {
    let d = coeffs.len().saturating_sub(1);
    let scale = coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale <= NORM_FLOOR || d == 0 {
        return Vec::new();
    }
    // Leading coefficients in t vanish: roots at infinity (1 : 0).
    let mut infinite = 0usize;
    while infinite <= d && coeffs[infinite].norm() <= 1e-12 * scale {
        infinite += 1;
    }
    let mut out: Vec<(C, C)> = (0..infinite).map(|_| (C::new(1.0, 0.0), C::new(0.0, 0.0))).collect();
    if infinite > d {
        return Vec::new();
    }
    // Dehomogenize at s = 1: p(t) = Σ_j c[j] t^{d-j}, ascending coefficients.
    let ascending: Vec<C> = (0..=d - infinite)
        .map(|power| coeffs[d - power])
        .collect();
    for root in univariate_roots(&ascending) {
        out.push((root, C::new(1.0, 0.0)));
    }
    out
}

/// Distance between projective parameter points on the complex line.
pub fn p1_distance(a: (C, C), b: (C, C)) -> f64 {
    let av = CVec::from_vec(vec![a.0, a.1]);
    let bv = CVec::from_vec(vec![b.0, b.1]);
    crate::numeric::proj_distance_vec(&av, &bv)
}
