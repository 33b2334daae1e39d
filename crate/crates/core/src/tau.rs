//! The `τ_n` polynomial basis and the weighted norms built on it.
//!
//! `τ_0 = 1`, `τ_1 = u`, `τ_{n+1} = D τ_n / n`. Each `τ_n` has exact degree
//! `n` and `τ_n(tanh z)` is the `(n−1)`-st derivative of `tanh z` divided by
//! `(n−1)!`. Any `p ∈ P_n` has a unique expansion `p = Σ a_k τ_k`, and
//!
//! ```text
//! ‖p‖_n = Σ_k |a_k| (π/2)^(n−k).
//! ```

use std::sync::{Arc, OnceLock, RwLock};

use rug::{Float, Rational};

use crate::mp;
use crate::poly::{Poly, PolyError};

/// Lazily grown table of `τ_0..τ_n`. Published snapshots are immutable.
#[derive(Debug)]
pub struct TauBasis {
    table: RwLock<Arc<Vec<Poly>>>,
    frozen: bool,
}

impl Default for TauBasis {
    fn default() -> Self {
        TauBasis::new()
    }
}

impl TauBasis {
    pub fn new() -> Self {
        TauBasis {
            table: RwLock::new(Arc::new(vec![Poly::one(), Poly::u()])),
            frozen: false,
        }
    }

    /// A basis backed by a caller-supplied table that is never extended.
    /// Used to inject known-bad tables into the validation suite.
    pub fn from_table(table: Vec<Poly>) -> Self {
        TauBasis {
            table: RwLock::new(Arc::new(table)),
            frozen: true,
        }
    }

    /// Process-wide shared basis.
    pub fn global() -> &'static TauBasis {
        static GLOBAL: OnceLock<TauBasis> = OnceLock::new();
        GLOBAL.get_or_init(TauBasis::new)
    }

    /// Snapshot containing at least `τ_0..=τ_n`.
    pub fn upto(&self, n: usize) -> Arc<Vec<Poly>> {
        {
            let snap = self.table.read().expect("tau table poisoned");
            if snap.len() > n || self.frozen {
                return Arc::clone(&snap);
            }
        }
        let mut guard = self.table.write().expect("tau table poisoned");
        if guard.len() <= n {
            let mut grown: Vec<Poly> = guard.as_ref().clone();
            while grown.len() <= n {
                let k = grown.len() - 1;
                let next = grown[k].apply_d().scale(&Rational::from((1, k as u64)));
                grown.push(next);
            }
            *guard = Arc::new(grown);
        }
        Arc::clone(&guard)
    }

    pub fn tau(&self, n: usize) -> Poly {
        self.upto(n)[n].clone()
    }

    /// `τ_n`, or `None` when a frozen table stops short of `n`.
    pub fn try_tau(&self, n: usize) -> Option<Poly> {
        self.upto(n).get(n).cloned()
    }

    /// Highest index available without growing a frozen table.
    pub fn covers(&self, n: usize) -> bool {
        self.upto(n).len() > n
    }

    /// Triangular change of basis from monomials to `τ_k`.
    pub fn to_tau(&self, p: &Poly) -> TauExpansion {
        let Some(deg) = p.degree() else {
            return TauExpansion::default();
        };
        let basis = self.upto(deg);
        let mut rest = p.coeffs().to_vec();
        let mut coeffs = vec![Rational::new(); deg + 1];
        for k in (0..=deg).rev() {
            if rest[k] == 0 {
                continue;
            }
            let tk = &basis[k];
            let lead = tk.leading_coeff().expect("tau_k is nonzero");
            let a = Rational::from(&rest[k] / lead);
            for (j, c) in tk.coeffs().iter().enumerate() {
                if *c != 0 {
                    rest[j] -= Rational::from(&a * c);
                }
            }
            coeffs[k] = a;
        }
        TauExpansion::new(coeffs)
    }

    pub fn from_tau(&self, e: &TauExpansion) -> Poly {
        let Some(top) = e.coeffs.len().checked_sub(1) else {
            return Poly::zero();
        };
        let basis = self.upto(top);
        let mut p = Poly::zero();
        for (k, a) in e.coeffs.iter().enumerate() {
            if *a != 0 {
                p += &basis[k].scale(a);
            }
        }
        p
    }

    /// `‖p‖_n` evaluated with `prec` bits.
    pub fn norm(&self, p: &Poly, n: usize, prec: u32) -> Result<Float, PolyError> {
        if let Some(degree) = p.degree() {
            if degree > n {
                return Err(PolyError::DegreeExceedsIndex { degree, index: n });
            }
        }
        Ok(self.to_tau(p).weighted_norm(n, prec))
    }
}

/// Coefficients `a_k` with `p = Σ a_k τ_k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TauExpansion {
    coeffs: Vec<Rational>,
}

impl TauExpansion {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        TauExpansion { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    /// `Σ |a_k| (π/2)^(n−k)`; the caller guarantees `len ≤ n + 1`.
    pub fn weighted_norm(&self, n: usize, prec: u32) -> Float {
        let half_pi = mp::pi(prec) / 2u32;
        let mut acc = Float::with_val(prec, 0);
        let mut weight = Float::with_val(prec, 1);
        for k in (0..=n).rev() {
            if let Some(a) = self.coeffs.get(k) {
                if *a != 0 {
                    acc += Float::with_val(prec, Rational::from(a.abs_ref())) * &weight;
                }
            }
            weight *= &half_pi;
        }
        acc
    }
}

/// `τ_n` from the shared basis.
pub fn tau(n: usize) -> Poly {
    TauBasis::global().tau(n)
}

pub fn to_tau(p: &Poly) -> TauExpansion {
    TauBasis::global().to_tau(p)
}

pub fn from_tau(e: &TauExpansion) -> Poly {
    TauBasis::global().from_tau(e)
}

/// `‖p‖_n` over the shared basis.
pub fn norm(p: &Poly, n: usize, prec: u32) -> Result<Float, PolyError> {
    TauBasis::global().norm(p, n, prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_basis_elements() {
        assert_eq!(tau(0), Poly::one());
        assert_eq!(tau(1), Poly::u());
        assert_eq!(tau(2), Poly::from_terms(&[(0, 1, 1), (2, -1, 1)]));
        assert_eq!(
            tau(4),
            Poly::from_terms(&[(4, -1, 1), (2, 4, 3), (0, -1, 3)])
        );
        for n in 0..30 {
            assert_eq!(tau(n).degree(), Some(n));
        }
    }

    #[test]
    fn small_expansions() {
        let e = to_tau(&Poly::one());
        assert_eq!(e.coeffs(), &[Rational::from(1)]);
        let e = to_tau(&Poly::monomial(1, 2));
        assert_eq!(e.coeff(0), 1);
        assert_eq!(e.coeff(1), 0);
        assert_eq!(e.coeff(2), -1);
        let e = to_tau(&Poly::monomial(1, 3));
        assert_eq!(e.coeff(1), 1);
        assert_eq!(e.coeff(3), 1);
        assert_eq!(e.coeff(0), 0);
        assert_eq!(e.coeff(2), 0);
    }

    #[test]
    fn norm_examples() {
        let prec = 256;
        let n = norm(&tau(3), 3, prec).unwrap();
        assert_eq!(n, 1);
        let half_pi = mp::pi(prec) / 2u32;
        let n = norm(&Poly::u(), 2, prec).unwrap();
        assert!((n - &half_pi).abs() < 1e-70);
        let n = norm(&Poly::monomial(1, 2), 2, prec).unwrap();
        let expect = half_pi.clone() * &half_pi + 1u32;
        assert!((n - expect).abs() < 1e-70);
        assert!(matches!(
            norm(&Poly::monomial(1, 3), 2, prec),
            Err(PolyError::DegreeExceedsIndex { degree: 3, index: 2 })
        ));
    }

    #[test]
    fn d_raises_tau_index() {
        for n in 1..25 {
            assert_eq!(tau(n).apply_d(), tau(n + 1).scale(&Rational::from(n as u64)));
        }
    }

    #[test]
    fn frozen_table_is_not_extended() {
        let b = TauBasis::from_table(vec![Poly::one(), Poly::u()]);
        assert_eq!(b.upto(5).len(), 2);
    }
}
