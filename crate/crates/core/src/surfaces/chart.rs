//! Hyperspherical coordinates on S^m ⊂ ℝ^{m+1}, with analytic derivatives.
//!
//! x_0 = cos u_0, x_j = sin u_0 ⋯ sin u_{j-1} cos u_j, x_m = sin u_0 ⋯ sin u_{m-1}.
//! Angles u_0..u_{m-2} are polar in (0, π); u_{m-1} is periodic in [0, 2π).

use std::f64::consts::PI;

use nalgebra::DVector;

use super::ChartAxis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Factor {
    One,
    Sin,
    Cos,
}

impl Factor {
    fn eval(self, x: f64, order: usize) -> f64 {
        match self {
            Factor::One => {
                if order == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Factor::Sin => match order % 4 {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            },
            Factor::Cos => match order % 4 {
                0 => x.cos(),
                1 => -x.sin(),
                2 => -x.cos(),
                _ => x.sin(),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct HypersphericalChart {
    // table[j][k]: factor of coordinate j contributed by angle k
    table: Vec<Vec<Factor>>,
}

impl HypersphericalChart {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "hyperspherical chart needs m >= 1");
        let table = (0..=m)
            .map(|j| {
                (0..m)
                    .map(|k| {
                        if j == m || k < j {
                            Factor::Sin
                        } else if k == j {
                            Factor::Cos
                        } else {
                            Factor::One
                        }
                    })
                    .collect()
            })
            .collect();
        Self { table }
    }

    /// Number of angles m.
    pub fn params(&self) -> usize {
        self.table.len() - 1
    }

    pub fn axes(&self) -> Vec<ChartAxis> {
        let m = self.params();
        (0..m)
            .map(|k| {
                if k + 1 == m {
                    ChartAxis::periodic(0.0, 2.0 * PI)
                } else {
                    ChartAxis::bounded(0.0, PI)
                }
            })
            .collect()
    }

    fn eval_orders(&self, u: &[f64], orders: &[usize]) -> DVector<f64> {
        DVector::from_iterator(
            self.table.len(),
            self.table.iter().map(|row| {
                row.iter()
                    .zip(u.iter().zip(orders))
                    .map(|(f, (x, o))| f.eval(*x, *o))
                    .product::<f64>()
            }),
        )
    }

    pub fn value(&self, u: &[f64]) -> DVector<f64> {
        self.eval_orders(u, &vec![0; self.params()])
    }

    pub fn first(&self, u: &[f64]) -> Vec<DVector<f64>> {
        let m = self.params();
        (0..m)
            .map(|i| {
                let mut orders = vec![0; m];
                orders[i] = 1;
                self.eval_orders(u, &orders)
            })
            .collect()
    }

    pub fn second(&self, u: &[f64]) -> Vec<Vec<DVector<f64>>> {
        let m = self.params();
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let mut orders = vec![0; m];
                        orders[i] += 1;
                        orders[j] += 1;
                        self.eval_orders(u, &orders)
                    })
                    .collect()
            })
            .collect()
    }
}
