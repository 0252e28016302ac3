//! Forward-mode dual numbers with a fixed-capacity gradient, used to get
//! basis gradients out of the same recurrences that produce the values.

use std::ops::{Add, Mul, Sub};

pub(crate) const MAX_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dual {
    pub v: f64,
    pub g: [f64; MAX_DIM],
}

impl Dual {
    pub fn constant(v: f64) -> Self {
        Dual { v, g: [0.0; MAX_DIM] }
    }

    pub fn variable(v: f64, i: usize) -> Self {
        let mut g = [0.0; MAX_DIM];
        g[i] = 1.0;
        Dual { v, g }
    }

    pub fn scale(self, c: f64) -> Self {
        let mut g = self.g;
        g.iter_mut().for_each(|x| *x *= c);
        Dual { v: self.v * c, g }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: Dual) -> Dual {
        let mut g = self.g;
        for (a, b) in g.iter_mut().zip(o.g) {
            *a += b;
        }
        Dual { v: self.v + o.v, g }
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: Dual) -> Dual {
        let mut g = self.g;
        for (a, b) in g.iter_mut().zip(o.g) {
            *a -= b;
        }
        Dual { v: self.v - o.v, g }
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        let mut g = [0.0; MAX_DIM];
        for i in 0..MAX_DIM {
            g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        Dual { v: self.v * o.v, g }
    }
}
