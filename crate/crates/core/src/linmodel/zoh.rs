//! Zero-order-hold discretization.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sysid::StateSpaceModel;

/// Exact ZOH equivalent of the continuous model `ct` at step `dt`, from the
/// exponential of the augmented matrix `[[A, B], [0, 0]] dt`.
pub fn discretize_zoh(ct: &StateSpaceModel, dt: f64) -> Result<StateSpaceModel> {
    if ct.is_discrete() {
        return Err(Error::Validation(
            "discretize_zoh expects a continuous model".into(),
        ));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!(
            "discretization step must be > 0, got {dt}"
        )));
    }
    let (n, m) = (ct.order(), ct.n_inputs());
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&ct.a * dt));
    aug.view_mut((0, n), (n, m)).copy_from(&(&ct.b * dt));
    let e = aug.exp();
    let ad = e.view((0, 0), (n, n)).into_owned();
    let bd = e.view((0, n), (n, m)).into_owned();
    let mut out = StateSpaceModel::new(ad, bd, ct.c.clone(), ct.d.clone(), dt)?;
    out.input_labels = ct.input_labels.clone();
    out.output_labels = ct.output_labels.clone();
    Ok(out)
}
