//! Birth and death of empty components.
//!
//! A birth draws `w ~ Beta(kappa_eta / (C+1), kappa_eta C / (C+1))`, scales
//! the existing weights by `1 - w`, inserts a component with weight `w` and
//! parameters from the prior at a uniform position, and leaves all data
//! where they were. A death removes a uniformly chosen empty component and
//! renormalizes. Birth and death are proposed with probability one half
//! each.

use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;

use super::Diagnostics;
use crate::error::Result;
use crate::model::{draw_component, uniform_index, Hyperparameters, ModelState};
use crate::samplers::{beta_unchecked, open_uniform, RandomStream};
use crate::special::lgamma;

fn beta_logpdf(w: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * w.ln() + (b - 1.0) * (-w).ln_1p() + lgamma(a + b) - lgamma(a) - lgamma(b)
}

fn dirichlet_symmetric_logpdf(p: &[f64], eta: f64) -> f64 {
    let c = p.len() as f64;
    let mut v = -0.5 * c.ln() + lgamma(c * eta) - c * lgamma(eta);
    for &w in p {
        v += (eta - 1.0) * w.ln();
    }
    v
}

/// Log acceptance ratio of a birth from `old_weights` (`C` components, of
/// which `empty_before` have no data) to `new_weights` (`C + 1`), where the
/// new component took weight `w`. `n_data` is the total number of data.
///
/// ```text
/// ln P(C+1) - ln P(C) + ln Dir(p') - ln Dir(p) + n ln(1 - w)      target
///   + ln(C+1) - ln(C0+1) - ln Beta(w)                            proposals
///   + (C-1) ln(1 - w) + ln sqrt((C+1)/C)                         Jacobian
/// ```
///
/// The last term converts between surface measures on the two simplices,
/// matching the `1/sqrt(C)` in the Dirichlet density. The new component's
/// prior density cancels against its proposal density.
pub fn birth_log_ratio(
    old_weights: &[f64],
    new_weights: &[f64],
    w: f64,
    empty_before: usize,
    n_data: usize,
    hyper: &Hyperparameters,
) -> f64 {
    let c = old_weights.len();
    let cf = c as f64;
    let log_1mw = (-w).ln_1p();
    let target = hyper.log_prior_c(c + 1) - hyper.log_prior_c(c)
        + dirichlet_symmetric_logpdf(new_weights, hyper.eta(c + 1))
        - dirichlet_symmetric_logpdf(old_weights, hyper.eta(c))
        + n_data as f64 * log_1mw;
    let a = hyper.eta(c + 1);
    let proposal = (cf + 1.0).ln() - (empty_before as f64 + 1.0).ln() - beta_logpdf(w, a, cf * a);
    let jacobian = (cf - 1.0) * log_1mw + 0.5 * ((cf + 1.0) / cf).ln();
    target + proposal + jacobian
}

/// One birth-or-death proposal on the state, in place.
pub(crate) fn resample_count_in_place(
    rs: &mut RandomStream,
    state: &mut ModelState,
    n_data: usize,
    hyper: &Hyperparameters,
    diag: &mut Diagnostics,
) -> Result<()> {
    let c = state.c_count();
    let counts = state.counts();
    let empty: Vec<usize> = (0..c).filter(|&i| counts[i] == 0).collect();
    if rs.random::<bool>() {
        diag.birth_proposals += 1;
        if c >= hyper.c_max {
            return Ok(());
        }
        let a = hyper.eta(c + 1);
        let w = beta_unchecked(rs, a, c as f64 * a);
        if !(w > 0.0 && w < 1.0) {
            return Ok(());
        }
        let pos = uniform_index(rs, c + 1);
        let mut new_weights: Vec<f64> = state.weights.iter().map(|p| p * (1.0 - w)).collect();
        new_weights.insert(pos, w);
        let log_a = birth_log_ratio(&state.weights, &new_weights, w, empty.len(), n_data, hyper);
        let comp = draw_component(rs, &state.top, hyper)?;
        if open_uniform(rs).ln() < log_a {
            diag.birth_accepts += 1;
            state.weights = new_weights;
            state.components.insert(pos, comp);
            for k in state.assignments.iter_mut() {
                if *k >= pos {
                    *k += 1;
                }
            }
        }
    } else {
        diag.death_proposals += 1;
        if c <= 1 || empty.is_empty() {
            return Ok(());
        }
        let pos = empty[uniform_index(rs, empty.len())];
        let w = state.weights[pos];
        let mut new_weights: Vec<f64> = state.weights.clone();
        new_weights.remove(pos);
        let rest: f64 = new_weights.iter().sum();
        if !(rest > 0.0) {
            return Ok(());
        }
        new_weights.iter_mut().for_each(|p| *p /= rest);
        let log_a = -birth_log_ratio(&new_weights, &state.weights, w, empty.len() - 1, n_data, hyper);
        if open_uniform(rs).ln() < log_a {
            diag.death_accepts += 1;
            state.weights = new_weights;
            state.components.remove(pos);
            for k in state.assignments.iter_mut() {
                if *k > pos {
                    *k -= 1;
                }
            }
        }
    }
    Ok(())
}

/// Applies one birth/death proposal and returns the resulting state.
pub fn resample_component_count(
    rs: &mut RandomStream,
    state: &ModelState,
    n_data: usize,
    hyper: &Hyperparameters,
) -> Result<ModelState> {
    let mut next = state.clone();
    let mut diag = Diagnostics::default();
    resample_count_in_place(rs, &mut next, n_data, hyper, &mut diag)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{component_log_prior, draw_data, log_joint, prior_sample, JDataset};
    use std::vec::Vec;

    #[test]
    fn birth_ratio_matches_joint_density_difference() {
        let h = Hyperparameters::default();
        let mut rs = RandomStream::new(41, 0);
        for trial in 0..200 {
            let mut before = prior_sample(&mut rs, &h).unwrap();
            if before.c_count() >= h.c_max {
                continue;
            }
            let n = trial % 7;
            let xs = draw_data(&mut rs, &mut before, n);
            let data = JDataset::new(xs, "t").unwrap();
            let c = before.c_count();
            let empty = before.counts().iter().filter(|&&k| k == 0).count();

            let w = 0.05 + 0.9 * (trial as f64 / 200.0);
            let pos = trial % (c + 1);
            let mut after = before.clone();
            after.weights.iter_mut().for_each(|p| *p *= 1.0 - w);
            after.weights.insert(pos, w);
            let comp = draw_component(&mut rs, &after.top, &h).unwrap();
            after.components.insert(pos, comp);
            after.assignments.iter_mut().for_each(|k| {
                if *k >= pos {
                    *k += 1
                }
            });

            // Oracle: full joint densities, independent proposal terms.
            let a = h.kappa_eta / (c as f64 + 1.0);
            let b = h.kappa_eta * c as f64 / (c as f64 + 1.0);
            let beta = (a - 1.0) * w.ln() + (b - 1.0) * (1.0 - w).ln() + libm::lgamma(a + b)
                - libm::lgamma(a)
                - libm::lgamma(b);
            let oracle = log_joint(&after, &data, &h).unwrap()
                - log_joint(&before, &data, &h).unwrap()
                - component_log_prior(&comp, &after.top, &h)
                + ((c + 1) as f64).ln()
                - ((empty + 1) as f64).ln()
                - beta
                + (c as f64 - 1.0) * (1.0 - w).ln()
                + 0.5 * ((c as f64 + 1.0) / c as f64).ln();
            let got = birth_log_ratio(&before.weights, &after.weights, w, empty, data.len(), &h);
            assert!((got - oracle).abs() < 1e-9 * oracle.abs().max(1.0), "{got} vs {oracle}");
        }
    }

    #[test]
    fn birth_blocked_at_c_max_when_all_occupied() {
        let h = Hyperparameters { c_max: 2, ..Default::default() };
        let mut rs = RandomStream::new(42, 0);
        let mut state = prior_sample(&mut rs, &h).unwrap();
        while state.c_count() != 2 {
            state = prior_sample(&mut rs, &h).unwrap();
        }
        state.assignments = std::vec![0, 1, 0];
        state.alphas = std::vec![1.0; 3];
        for _ in 0..1000 {
            let next = resample_component_count(&mut rs, &state, 3, &h).unwrap();
            assert_eq!(next, state);
        }
    }

    #[test]
    fn moves_keep_state_consistent() {
        let h = Hyperparameters::default();
        let mut rs = RandomStream::new(43, 0);
        let mut state = prior_sample(&mut rs, &h).unwrap();
        let xs: Vec<f64> = draw_data(&mut rs, &mut state, 20);
        let mut diag = Diagnostics::default();
        for _ in 0..5000 {
            let before: Vec<f64> = state.assignments.iter().map(|&k| state.components[k].mu).collect();
            resample_count_in_place(&mut rs, &mut state, xs.len(), &h, &mut diag).unwrap();
            state.validate().unwrap();
            let after: Vec<f64> = state.assignments.iter().map(|&k| state.components[k].mu).collect();
            assert_eq!(before, after, "data must follow their component through relabelling");
        }
        assert!(diag.birth_accepts > 0 && diag.death_accepts > 0);
    }
}
