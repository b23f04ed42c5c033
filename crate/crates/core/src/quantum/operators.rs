//! Operators on the two-atom ⊗ Fock space.
//!
//! Basis ordering is atom 1 ⊗ atom 2 ⊗ Fock, each atom in {g, e} with g
//! first, so `|a1 a2, n⟩` sits at index `(2·a1 + a2)·(n_max + 1) + n`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Operator = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpace {
    n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Atom {
    First,
    Second,
}

/// Symmetric (+) or antisymmetric (−) single-excitation Dicke state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dicke {
    Plus,
    Minus,
}

impl Dicke {
    fn sign(self) -> f64 {
        match self {
            Dicke::Plus => 1.0,
            Dicke::Minus => -1.0,
        }
    }
}

impl HilbertSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::param("n_max", "Fock cutoff must be at least 1"));
        }
        Ok(Self { n_max })
    }

    /// Inverse of [`HilbertSpace::dim`].
    pub fn from_dim(dim: usize) -> Result<Self> {
        if dim % 4 != 0 || dim < 8 {
            return Err(Error::param("dim", format!("{dim} is not 4·(n_max + 1) with n_max ≥ 1")));
        }
        Self::new(dim / 4 - 1)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        4 * self.fock_dim()
    }

    /// Index of `|a1 a2, n⟩` with atom states 0 = g, 1 = e.
    pub fn index(&self, a1: usize, a2: usize, n: usize) -> usize {
        (2 * a1 + a2) * self.fock_dim() + n
    }

    pub fn identity(&self) -> Operator {
        Operator::identity(self.dim(), self.dim())
    }

    /// Cavity annihilation operator â.
    pub fn annihilation(&self) -> Operator {
        let nf = self.fock_dim();
        let a = Operator::from_fn(nf, nf, |i, j| {
            if j == i + 1 {
                Complex64::new((j as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        });
        Operator::identity(4, 4).kronecker(&a)
    }

    pub fn number(&self) -> Operator {
        let a = self.annihilation();
        a.adjoint() * a
    }

    /// Atomic lowering operator σ̂_n = |g⟩⟨e|.
    pub fn sigma(&self, atom: Atom) -> Operator {
        let lower = Operator::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        let id2 = Operator::identity(2, 2);
        let atoms = match atom {
            Atom::First => lower.kronecker(&id2),
            Atom::Second => id2.kronecker(&lower),
        };
        atoms.kronecker(&Operator::identity(self.fock_dim(), self.fock_dim()))
    }

    /// Dicke lowering operator Ŝ_± = (σ̂_1 ± σ̂_2)/√2.
    pub fn dicke_lowering(&self, which: Dicke) -> Operator {
        (self.sigma(Atom::First) + self.sigma(Atom::Second) * Complex64::new(which.sign(), 0.0))
            * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }

    /// Total excitation Σ_n σ̂_n†σ̂_n.
    pub fn excitation(&self) -> Operator {
        [Atom::First, Atom::Second]
            .iter()
            .map(|&a| {
                let s = self.sigma(a);
                s.adjoint() * s
            })
            .fold(Operator::zeros(self.dim(), self.dim()), |acc, x| acc + x)
    }

    /// Projector |±⟩⟨±| ⊗ 1_cavity with |±⟩ = (|eg⟩ ± |ge⟩)/√2.
    pub fn dicke_projector(&self, which: Dicke) -> Operator {
        let mut atoms = Operator::zeros(4, 4);
        let eg = 2;
        let ge = 1;
        let s = which.sign();
        atoms[(eg, eg)] = Complex64::new(0.5, 0.0);
        atoms[(ge, ge)] = Complex64::new(0.5, 0.0);
        atoms[(eg, ge)] = Complex64::new(0.5 * s, 0.0);
        atoms[(ge, eg)] = Complex64::new(0.5 * s, 0.0);
        atoms.kronecker(&Operator::identity(self.fock_dim(), self.fock_dim()))
    }

    /// Projector onto the highest retained Fock level.
    pub fn top_fock_projector(&self) -> Operator {
        let mut op = Operator::zeros(self.dim(), self.dim());
        for atoms in 0..4 {
            let i = atoms * self.fock_dim() + self.n_max;
            op[(i, i)] = ONE;
        }
        op
    }
}

/// Tr(A ρ) without forming the product.
pub fn expectation(op: &Operator, rho: &Operator) -> Complex64 {
    let d = op.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            let a = op[(i, k)];
            if a != ZERO {
                acc += a * rho[(k, i)];
            }
        }
    }
    acc
}

/// Largest absolute entry.
pub fn max_abs(op: &Operator) -> f64 {
    op.iter().fold(0.0, |m, z| m.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_and_indexing() {
        let hs = HilbertSpace::new(5).unwrap();
        assert_eq!(hs.dim(), 24);
        assert_eq!(hs.index(1, 0, 3), 15);
        assert_eq!(HilbertSpace::from_dim(24).unwrap(), hs);
        assert!(HilbertSpace::new(0).is_err());
        assert!(HilbertSpace::from_dim(6).is_err());
    }

    #[test]
    fn annihilation_acts_on_fock_factor() {
        let hs = HilbertSpace::new(3).unwrap();
        let a = hs.annihilation();
        // â|eg, 2⟩ = √2 |eg, 1⟩
        let from = hs.index(1, 0, 2);
        let to = hs.index(1, 0, 1);
        assert!((a[(to, from)].re - 2f64.sqrt()).abs() < 1e-15);
        let n = hs.number();
        for i in 0..hs.dim() {
            assert!((n[(i, i)].re - (i % hs.fock_dim()) as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn sigma_lowers_the_right_atom() {
        let hs = HilbertSpace::new(1).unwrap();
        let s2 = hs.sigma(Atom::Second);
        assert_eq!(s2[(hs.index(1, 0, 1), hs.index(1, 1, 1))], ONE);
        let s1 = hs.sigma(Atom::First);
        assert_eq!(s1[(hs.index(0, 1, 0), hs.index(1, 1, 0))], ONE);
        assert_eq!(s1.iter().filter(|z| **z != ZERO).count(), 4);
    }

    #[test]
    fn dicke_raising_creates_projected_state() {
        let hs = HilbertSpace::new(1).unwrap();
        let gg0 = hs.index(0, 0, 0);
        for which in [Dicke::Plus, Dicke::Minus] {
            let raise = hs.dicke_lowering(which).adjoint();
            let p = hs.dicke_projector(which);
            let state = raise.column(gg0).into_owned();
            let projected = &p * &state;
            assert!((projected - &state).norm() < 1e-15);
            assert!((state.norm() - 1.0).abs() < 1e-15);
        }
        let pp = hs.dicke_projector(Dicke::Plus) * hs.dicke_projector(Dicke::Minus);
        assert!(max_abs(&pp) < 1e-15);
    }
}
