use rug::{Integer, Rational};

use super::{DSeries, Parities, Parity};
use crate::poly::Poly;

/// Which analytic function a kernel expands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// `exp(θz)` for a rational step `θ`.
    Exp,
    CoshHalf,
    SinhHalf,
    Cosh,
    Sinh,
    /// `sinh(z/2)/z`.
    SinhHalfOverZ,
    /// `z^{−2}(z − 2 sinh(z/2))`.
    Entire,
    Custom,
}

/// Taylor coefficients `f_i` of `f(z)`, used as the operator
/// `f(dD)Q = Σ_n (Σ_i f_i D^i Q_{n−i}) d^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    kind: KernelKind,
    taylor: Vec<Rational>,
    parity: Option<Parity>,
}

fn inv_factorial(n: usize) -> Rational {
    Rational::from((Integer::from(1), Integer::from(Integer::factorial(n as u32))))
}

impl Kernel {
    pub fn custom(taylor: Vec<Rational>) -> Self {
        let parity = if taylor.iter().skip(1).step_by(2).all(|c| *c == 0) {
            Some(Parity::Even)
        } else if taylor.iter().step_by(2).all(|c| *c == 0) {
            Some(Parity::Odd)
        } else {
            None
        };
        Kernel {
            kind: KernelKind::Custom,
            taylor,
            parity,
        }
    }

    fn build(kind: KernelKind, order: usize, f: impl Fn(usize) -> Rational) -> Self {
        let taylor: Vec<Rational> = (0..=order).map(f).collect();
        let parity = Kernel::custom(taylor.clone()).parity;
        Kernel { kind, taylor, parity }
    }

    /// `exp(θz)`.
    pub fn exp(theta: &Rational, order: usize) -> Self {
        let mut power = Rational::from(1);
        let mut taylor = Vec::with_capacity(order + 1);
        for i in 0..=order {
            taylor.push(Rational::from(&power * &inv_factorial(i)));
            power *= theta;
        }
        let parity = Kernel::custom(taylor.clone()).parity;
        Kernel {
            kind: KernelKind::Exp,
            taylor,
            parity,
        }
    }

    /// `cosh(z/2)`
    pub fn cosh_half(order: usize) -> Self {
        Kernel::build(KernelKind::CoshHalf, order, |i| {
            if i % 2 == 0 {
                inv_factorial(i) >> (i as u32)
            } else {
                Rational::new()
            }
        })
    }

    /// `sinh(z/2)`
    pub fn sinh_half(order: usize) -> Self {
        Kernel::build(KernelKind::SinhHalf, order, |i| {
            if i % 2 == 1 {
                inv_factorial(i) >> (i as u32)
            } else {
                Rational::new()
            }
        })
    }

    pub fn cosh(order: usize) -> Self {
        Kernel::build(KernelKind::Cosh, order, |i| {
            if i % 2 == 0 {
                inv_factorial(i)
            } else {
                Rational::new()
            }
        })
    }

    pub fn sinh(order: usize) -> Self {
        Kernel::build(KernelKind::Sinh, order, |i| {
            if i % 2 == 1 {
                inv_factorial(i)
            } else {
                Rational::new()
            }
        })
    }

    /// `sinh(z/2)/z = Σ_k z^{2k} / (2^{2k+1} (2k+1)!)`.
    pub fn sinh_half_over_z(order: usize) -> Self {
        Kernel::build(KernelKind::SinhHalfOverZ, order, |i| {
            if i % 2 == 0 {
                inv_factorial(i + 1) >> (i as u32 + 1)
            } else {
                Rational::new()
            }
        })
    }

    /// `z^{−2}(z − 2 sinh(z/2)) = −Σ_{k≥1} z^{2k−1} / (4^k (2k+1)!)`.
    pub fn entire_remainder(order: usize) -> Self {
        Kernel::build(KernelKind::Entire, order, |i| {
            if i % 2 == 1 {
                let k = i.div_ceil(2);
                -(inv_factorial(2 * k + 1) >> (2 * k as u32))
            } else {
                Rational::new()
            }
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn taylor(&self) -> &[Rational] {
        &self.taylor
    }

    pub fn parity(&self) -> Option<Parity> {
        self.parity
    }

    /// Applies `f(dD)` to `q`. Coefficients beyond the kernel's stored
    /// Taylor length are treated as zero, so kernels must be built to at
    /// least the order of `q`.
    pub fn apply(&self, q: &DSeries) -> DSeries {
        let order = q.order();
        let mut out = vec![Poly::zero(); order + 1];
        for (m, src) in q.coeffs().iter().enumerate() {
            if src.is_zero() {
                continue;
            }
            let mut current = src.clone();
            for i in 0..=(order - m) {
                if i > 0 {
                    current = current.apply_d();
                    if current.is_zero() {
                        break;
                    }
                }
                match self.taylor.get(i) {
                    Some(f) if *f != 0 => out[m + i] += &current.scale(f),
                    _ => {}
                }
            }
        }
        let parity = match self.parity {
            Some(Parity::Even) => q.parity(),
            Some(Parity::Odd) => Parities {
                d: q.parity().d.map(Parity::flip),
                u: q.parity().u.map(Parity::flip),
            },
            None => Parities::NONE,
        };
        DSeries::from_coeffs(out).assume_parity(parity)
    }
}

pub fn apply_f_of_dd(kernel: &Kernel, q: &DSeries) -> DSeries {
    kernel.apply(q)
}

/// `𝒞 = cosh(dD/2)`.
pub fn op_c(q: &DSeries) -> DSeries {
    Kernel::cosh_half(q.order()).apply(q)
}

/// `𝒮 = sinh(dD/2)`.
pub fn op_s(q: &DSeries) -> DSeries {
    Kernel::sinh_half(q.order()).apply(q)
}

/// `𝒞₁ = cosh(dD)`.
pub fn op_c1(q: &DSeries) -> DSeries {
    Kernel::cosh(q.order()).apply(q)
}

/// `𝒮₁ = sinh(dD)`.
pub fn op_s1(q: &DSeries) -> DSeries {
    Kernel::sinh(q.order()).apply(q)
}

/// `𝒥 = 𝒮/(dD)`, the kernel `sinh(z/2)/z`.
pub fn op_j(q: &DSeries) -> DSeries {
    Kernel::sinh_half_over_z(q.order()).apply(q)
}
