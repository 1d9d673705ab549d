//! Second-order forward jets in two variables.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian at a
//! point. Arithmetic on jets propagates derivatives exactly, so quantities
//! assembled from fields with exact partials (gradient norms, normal
//! angles, induced metric entries, fluxes) come out with exact first and
//! second derivatives of their own, without symbolic tree growth.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jet2 {
    pub v: f64,
    pub g: [f64; 2],
    pub h: [[f64; 2]; 2],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 {
            v,
            g: [0.0, 0.0],
            h: [[0.0, 0.0], [0.0, 0.0]],
        }
    }

    /// Chain rule through a scalar function with derivatives `d1`, `d2`
    /// evaluated at `self.v`.
    pub fn chain(self, v: f64, d1: f64, d2: f64) -> Self {
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = d2 * self.g[i] * self.g[j] + d1 * self.h[i][j];
            }
        }
        Jet2 { v, g: [d1 * self.g[0], d1 * self.g[1]], h }
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }

    pub fn scale(self, k: f64) -> Self {
        self.chain(k * self.v, k, 0.0)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = self.h[i][j] + o.h[i][j];
            }
        }
        Jet2 {
            v: self.v + o.v,
            g: [self.g[0] + o.g[0], self.g[1] + o.g[1]],
            h,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.chain(-self.v, -1.0, 0.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = self.h[i][j] * o.v
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i]
                    + self.v * o.h[i][j];
            }
        }
        Jet2 {
            v: self.v * o.v,
            g: [
                self.g[0] * o.v + self.v * o.g[0],
                self.g[1] * o.v + self.v * o.g[1],
            ],
            h,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, k: f64) -> Jet2 {
        Jet2 { v: self.v + k, ..self }
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, k: f64) -> Jet2 {
        Jet2 { v: self.v - k, ..self }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, k: f64) -> Jet2 {
        self.scale(k)
    }
}
