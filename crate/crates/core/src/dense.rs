//! Minimal square dense matrices, used only at desk scale (KMS spot checks).

use num_complex::Complex;
use num_traits::Num;

use crate::scalar::Scalar;

/// Matrix entry over a scalar field `S`: the field itself or its complexification.
pub trait MatrixEntry<S: Scalar>: Clone + Num + From<S> {
    fn modulus_sq(&self) -> S;
    fn conj(&self) -> Self;
}

impl<S: Scalar> MatrixEntry<S> for Complex<S> {
    fn modulus_sq(&self) -> S {
        self.norm_sqr()
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
}

macro_rules! real_entry {
    ($t:ty) => {
        impl MatrixEntry<$t> for $t {
            fn modulus_sq(&self) -> $t {
                self.clone() * self.clone()
            }
            fn conj(&self) -> Self {
                self.clone()
            }
        }
    };
}

real_entry!(f64);
real_entry!(f32);
real_entry!(num_rational::BigRational);

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Clone + Num> DenseMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = T::one();
        }
        m
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = v.clone();
        }
        m
    }

    /// Row-major construction; `data.len()` must be a perfect square.
    pub fn from_row_major(dim: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), dim * dim, "expected {dim}x{dim} entries");
        DenseMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let prod = a.clone() * other.data[k * n + j].clone();
                    out.data[i * n + j] = out.data[i * n + j].clone() + prod;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }
}
