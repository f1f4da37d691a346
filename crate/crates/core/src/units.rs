//! dB conversions.

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1000.0).log10()
}

/// Linear power gain of a loss of `db` decibels.
pub fn db_loss_to_gain(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}
