//! Spin operators in the |m_S, m_I> product basis.
//!
//! Basis ordering: the electron-up block (m_S = +1/2) comes first, then the
//! electron-down block; within each block m_I runs from +I down to -I. All
//! ladder-operator matrix elements are real, so every operator except S_y and
//! I_y is a real matrix.

use crate::half::HalfInt;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Index bookkeeping for the 2(2I+1)-dimensional product space.
#[derive(Clone, Copy, Debug)]
pub struct ProductBasis {
    nuclear_spin: HalfInt,
}

impl ProductBasis {
    pub fn new(nuclear_spin: HalfInt) -> Self {
        Self { nuclear_spin }
    }

    pub fn nuclear_dim(&self) -> usize {
        (self.nuclear_spin.doubled() + 1) as usize
    }

    pub fn dim(&self) -> usize {
        2 * self.nuclear_dim()
    }

    /// Basis index of |m_S, m_I>.
    pub fn index(&self, m_s: HalfInt, m_i: HalfInt) -> usize {
        let block = if m_s == HalfInt::HALF { 0 } else { 1 };
        let offset = ((self.nuclear_spin.doubled() - m_i.doubled()) / 2) as usize;
        block * self.nuclear_dim() + offset
    }

    /// (m_S, m_I) of a basis index.
    pub fn quantum_numbers(&self, idx: usize) -> (HalfInt, HalfInt) {
        let n = self.nuclear_dim();
        let m_s = if idx < n {
            HalfInt::HALF
        } else {
            -HalfInt::HALF
        };
        let offset = (idx % n) as i32;
        let m_i = HalfInt::from_doubled(self.nuclear_spin.doubled() - 2 * offset);
        (m_s, m_i)
    }

    fn nuclear_ladder_element(&self, m_i: HalfInt) -> f64 {
        // <m_i + 1 | I_+ | m_i> = sqrt(I(I+1) - m_i(m_i+1))
        let i = self.nuclear_spin.value();
        let m = m_i.value();
        (i * (i + 1.0) - m * (m + 1.0)).sqrt()
    }

    /// Electron S_z (diagonal, +-1/2).
    pub fn s_z(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| {
            if r == c {
                self.quantum_numbers(r).0.value()
            } else {
                0.0
            }
        })
    }

    /// Electron S_x = (S_+ + S_-)/2; real matrix.
    pub fn s_x(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for idx in 0..d {
            let (m_s, m_i) = self.quantum_numbers(idx);
            // S_x flips the electron spin, leaving the nucleus alone.
            let flipped = self.index(-m_s, m_i);
            m[(flipped, idx)] = 0.5;
        }
        m
    }

    /// Electron S_y; purely imaginary matrix.
    pub fn s_y(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for idx in 0..d {
            let (m_s, m_i) = self.quantum_numbers(idx);
            let flipped = self.index(-m_s, m_i);
            // <down|S_y|up> = i/2, <up|S_y|down> = -i/2
            let sign = if m_s == HalfInt::HALF { 1.0 } else { -1.0 };
            m[(flipped, idx)] = Complex64::new(0.0, 0.5 * sign);
        }
        m
    }

    /// Nuclear I_z (diagonal).
    pub fn i_z(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| {
            if r == c {
                self.quantum_numbers(r).1.value()
            } else {
                0.0
            }
        })
    }

    /// Isotropic exchange S.I = S_z I_z + (S_+ I_- + S_- I_+)/2; real matrix.
    pub fn s_dot_i(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for idx in 0..d {
            let (m_s, m_i) = self.quantum_numbers(idx);
            m[(idx, idx)] += m_s.value() * m_i.value();
            let one = HalfInt::from_int(1);
            if m_s == -HalfInt::HALF && m_i.doubled() > -self.nuclear_spin.doubled() {
                // S_+ I_- / 2 on |down, m_i>: <m_i - 1|I_-|m_i> = <m_i|I_+|m_i - 1>
                let target = self.index(HalfInt::HALF, m_i - one);
                m[(target, idx)] += 0.5 * self.nuclear_ladder_element(m_i - one);
            }
            if m_s == HalfInt::HALF && m_i.doubled() < self.nuclear_spin.doubled() {
                // S_- I_+ / 2 on |up, m_i>
                let target = self.index(-HalfInt::HALF, m_i + one);
                m[(target, idx)] += 0.5 * self.nuclear_ladder_element(m_i);
            }
        }
        m
    }
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a * b - b * a
    }

    #[test]
    fn basis_indexing_round_trips() {
        let basis = ProductBasis::new(HalfInt::from_doubled(9));
        assert_eq!(basis.dim(), 20);
        for idx in 0..basis.dim() {
            let (ms, mi) = basis.quantum_numbers(idx);
            assert_eq!(basis.index(ms, mi), idx);
        }
    }

    #[test]
    fn spin_half_pauli_algebra() {
        let basis = ProductBasis::new(HalfInt::HALF);
        let sx = basis.s_x();
        let sz = basis.s_z();
        let sy = basis.s_y();
        // [S_z, S_x] = i S_y, whose entries are real: -Im(S_y)
        let comm = commutator(&sz, &sx);
        let expected = sy.map(|z| -z.im);
        assert!((comm - expected).norm() < 1e-14);
    }

    #[test]
    fn s_dot_i_is_symmetric_and_conserves_m() {
        let basis = ProductBasis::new(HalfInt::from_doubled(9));
        let sdi = basis.s_dot_i();
        assert!((&sdi - sdi.transpose()).norm() < 1e-14);
        // commutes with total J_z = S_z + I_z
        let jz = basis.s_z() + basis.i_z();
        assert!(commutator(&sdi, &jz).norm() < 1e-12);
    }

    #[test]
    fn casimir_value() {
        // S.I on the coupled basis satisfies S.I = (J^2 - S^2 - I^2)/2;
        // check the trace: tr(S.I) = 0 because tr(S_z I_z) = 0 and ladder
        // terms are off-diagonal.
        let basis = ProductBasis::new(HalfInt::from_doubled(9));
        assert!(basis.s_dot_i().trace().abs() < 1e-12);
    }
}
