//! Central finite-difference gradient checks.

use super::params::{ParamId, ParamStore};
use super::tape::{NodeId, Tape};

pub const FD_STEP: f64 = 1e-5;
/// Denominator floor so that vanishing gradients are compared absolutely.
pub const REL_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Default)]
pub struct GradReport {
    pub checked: usize,
    pub max_rel_error: f64,
    /// (parameter, index, analytic, numeric) of the worst coordinate.
    pub worst: Option<(String, usize, f64, f64)>,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Checks every coordinate of `ids`.
pub fn check_gradients(store: &ParamStore, ids: &[ParamId], f: impl Fn(&mut Tape) -> NodeId) -> GradReport {
    let coords: Vec<(ParamId, usize)> = ids
        .iter()
        .flat_map(|&id| (0..store.get(id).len()).map(move |i| (id, i)))
        .collect();
    check_coordinates(store, &coords, f)
}

/// Checks the listed (parameter, flat index) coordinates.
pub fn check_coordinates(
    store: &ParamStore,
    coords: &[(ParamId, usize)],
    f: impl Fn(&mut Tape) -> NodeId,
) -> GradReport {
    let eval = |s: &ParamStore| {
        let mut t = Tape::new(s);
        let out = f(&mut t);
        t.value_of(out)
    };
    let grads = {
        let mut t = Tape::new(store);
        let out = f(&mut t);
        t.backward(out)
    };
    let mut report = GradReport::default();
    let mut work = store.clone();
    for &(id, i) in coords {
        let orig = work.get(id).data[i];
        work.get_mut(id).data[i] = orig + FD_STEP;
        let plus = eval(&work);
        work.get_mut(id).data[i] = orig - FD_STEP;
        let minus = eval(&work);
        work.get_mut(id).data[i] = orig;
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        let analytic = grads.get(id)[i];
        let err = relative_error(analytic, numeric);
        report.checked += 1;
        if err > report.max_rel_error || report.worst.is_none() {
            report.max_rel_error = report.max_rel_error.max(err);
            if err >= report.max_rel_error {
                report.worst = Some((store.name(id).to_string(), i, analytic, numeric));
            }
        }
    }
    report
}
