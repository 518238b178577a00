//! Fourier analysis on `G` with the expectation normalization
//! `f^(xi) = E_x f(x) e(-xi . x)` and inversion `f(x) = sum_xi f^(xi) e(xi . x)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::group::{GroupFunction, GroupSpec};

/// A function on the dual group, indexed like group elements.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFunction {
    pub group: GroupSpec,
    pub values: Vec<Complex64>,
}

/// Precomputed per-factor transforms for one group, reusable across calls and threads.
#[derive(Clone)]
pub struct FourierPlan {
    group: GroupSpec,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl FourierPlan {
    pub fn new(group: &GroupSpec) -> Self {
        let mut planner = FftPlanner::new();
        let forward = group.orders().iter().map(|&n| planner.plan_fft_forward(n as usize)).collect();
        let inverse = group.orders().iter().map(|&n| planner.plan_fft_inverse(n as usize)).collect();
        Self { group: group.clone(), forward, inverse }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    /// Forward transform in place, scaled by `1/N`.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.apply(&self.forward, data);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    /// Inverse transform in place, unscaled.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.apply(&self.inverse, data);
    }

    fn apply(&self, plans: &[Arc<dyn Fft<f64>>], data: &mut [Complex64]) {
        let orders = self.group.orders();
        if orders.len() == 1 {
            plans[0].process(data);
            return;
        }
        let total = data.len();
        let mut stride = total;
        let mut line = Vec::new();
        for (axis, plan) in plans.iter().enumerate() {
            let n = orders[axis] as usize;
            stride /= n;
            if n == 1 {
                continue;
            }
            line.resize(n, Complex64::default());
            let block = n * stride;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride];
                    }
                    plan.process(&mut line);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
    }

    pub fn dft(&self, f: &GroupFunction) -> Result<DualFunction> {
        if f.group != self.group {
            return Err(Error::SpecMismatch);
        }
        let mut values = f.values.clone();
        self.forward_in_place(&mut values);
        Ok(DualFunction { group: self.group.clone(), values })
    }

    pub fn idft(&self, big_f: &DualFunction) -> Result<GroupFunction> {
        if big_f.group != self.group {
            return Err(Error::SpecMismatch);
        }
        let mut values = big_f.values.clone();
        self.inverse_in_place(&mut values);
        Ok(GroupFunction { group: self.group.clone(), values })
    }
}

/// `f^(xi) = (1/N) sum_x f(x) e(-xi . x)`.
pub fn dft(f: &GroupFunction) -> DualFunction {
    FourierPlan::new(&f.group).dft(f).expect("plan built for this group")
}

/// `f(x) = sum_xi F(xi) e(xi . x)`.
pub fn idft(big_f: &DualFunction) -> GroupFunction {
    FourierPlan::new(&big_f.group).idft(big_f).expect("plan built for this group")
}

/// Normalized convolution `f * g (x) = E_y f(y) g(x - y)`.
pub fn convolve(f: &GroupFunction, g: &GroupFunction) -> Result<GroupFunction> {
    if f.group != g.group {
        return Err(Error::SpecMismatch);
    }
    let plan = FourierPlan::new(&f.group);
    let mut a = plan.dft(f)?;
    let b = plan.dft(g)?;
    a.values.iter_mut().zip(&b.values).for_each(|(x, y)| *x *= y);
    plan.idft(&a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{e, e_rat, rat_f64, Rational};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn constant_transform() {
        let g: GroupSpec = "Z/4xZ/9".parse().unwrap();
        let f = GroupFunction::constant(&g, Complex64::new(1.0, 0.0));
        let fh = dft(&f);
        assert!(close(fh.values[0], Complex64::new(1.0, 0.0)));
        assert!(fh.values[1..].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn point_mass_and_character() {
        let g = GroupSpec::cyclic(5);
        let fh = dft(&GroupFunction::indicator(&g, &[0]));
        assert!(fh.values.iter().all(|z| close(*z, Complex64::new(0.2, 0.0))));
        let g = GroupSpec::cyclic(7);
        let f = GroupFunction::from_fn(&g, |c| e_rat(Rational::new(3 * c[0] as i64, 7)));
        let fh = dft(&f);
        for (xi, z) in fh.values.iter().enumerate() {
            let want = if xi == 3 { 1.0 } else { 0.0 };
            assert!(close(*z, Complex64::new(want, 0.0)));
        }
    }

    #[test]
    fn matches_definition_on_product() {
        let g: GroupSpec = "Z/3xZ/4xZ/5".parse().unwrap();
        let f = GroupFunction::from_fn(&g, |c| Complex64::new((c[0] * 7 + c[1]) as f64, c[2] as f64 - 1.0));
        let fh = dft(&f);
        for xi in 0..g.len() {
            let mut s = Complex64::default();
            for x in 0..g.len() {
                s += f.values[x] * e(-rat_f64(g.pair_idx(xi, x)));
            }
            assert!((s / g.len() as f64 - fh.values[xi]).norm() < 1e-10);
        }
        assert!(idft(&fh).max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn convolution_example() {
        let g = GroupSpec::cyclic(5);
        let a = GroupFunction::indicator(&g, &[0, 1]);
        let minus_a = GroupFunction::indicator(&g, &[0, 4]);
        let c = convolve(&a, &minus_a).unwrap();
        assert!((c.values[0].re - 0.4).abs() < 1e-12);
        let delta = GroupFunction::indicator(&g, &[0]).map(|z| z * 5.0);
        assert!(convolve(&a, &delta).unwrap().max_abs_diff(&a) < 1e-12);
    }
}

