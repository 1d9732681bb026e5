//! Summaries of arrow-of-time fields. Boundary slices `t = 0` and `t = N`
//! lack half their neighbours, so every summary here reads interior slices
//! only.

use serde::Serialize;

use crate::aot::{AotField, SpacetimeLattice};
use crate::qcore::{Pauli, PauliString};

/// Pearson correlation; `NaN` when either series is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn interior(field: &AotField) -> std::ops::Range<usize> {
    1..field.vectors.len().saturating_sub(1)
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = v.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        0.0
    } else {
        s / c as f64
    }
}

/// Largest equal-time contribution anywhere in the field.
pub fn max_equal_time_ci(field: &AotField) -> f64 {
    field
        .vectors
        .iter()
        .flatten()
        .flat_map(|v| v.contributions.iter().filter(move |c| c.t_index == v.t_index))
        .map(|c| c.ci.abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct SiteFringe {
    pub x: usize,
    pub mean_v_t_before: f64,
    pub mean_v_t_after: f64,
    /// Interior slices on the expected side of zero.
    pub agreeing_fraction: f64,
    pub sign_change: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FringeSummary {
    pub midpoint_index: usize,
    pub sites: Vec<SiteFringe>,
    /// Every site away from the chain ends flips from past- to future-pointing.
    pub bulk_sign_change: bool,
}

/// Sign of `v_t` before and after the middle slice, per site.
pub fn fringe_summary(field: &AotField) -> FringeSummary {
    let steps = field.vectors.len() - 1;
    let mid = steps / 2;
    let n = field.vectors[0].len();
    let sites: Vec<SiteFringe> = (0..n)
        .map(|x| {
            let before: Vec<f64> = (1..mid).map(|t| field.get(t, x).v_t).collect();
            let after: Vec<f64> = (mid + 1..steps).map(|t| field.get(t, x).v_t).collect();
            let agree = before.iter().filter(|v| **v < 0.0).count() + after.iter().filter(|v| **v > 0.0).count();
            let mb = mean(before.iter().copied());
            let ma = mean(after.iter().copied());
            SiteFringe {
                x,
                mean_v_t_before: mb,
                mean_v_t_after: ma,
                agreeing_fraction: agree as f64 / (before.len() + after.len()).max(1) as f64,
                sign_change: mb < 0.0 && ma > 0.0,
            }
        })
        .collect();
    let bulk_sign_change = n > 2 && sites[1..n - 1].iter().all(|s| s.sign_change);
    FringeSummary { midpoint_index: mid, sites, bulk_sign_change }
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoArrowsSummary {
    /// Time-averaged `v_t` per column.
    pub mean_v_t: Vec<f64>,
    /// Time-averaged `|v_x|` per column.
    pub mean_abs_v_x: Vec<f64>,
    pub left_mean_v_t: f64,
    pub right_mean_v_t: f64,
    pub opposite_arrows: bool,
    /// The two columns either side of the cut.
    pub interface_columns: [usize; 2],
    /// Argmax of `mean_abs_v_x` over columns `1..n-1`.
    pub bulk_peak_column: usize,
    pub peak_at_interface: bool,
}

pub fn two_arrows_summary(field: &AotField) -> TwoArrowsSummary {
    let n = field.vectors[0].len();
    let half = n / 2;
    let col = |x: usize, f: &dyn Fn(&crate::aot::AotVector) -> f64| mean(interior(field).map(|t| f(field.get(t, x))));
    let mean_v_t: Vec<f64> = (0..n).map(|x| col(x, &|v| v.v_t)).collect();
    let mean_abs_v_x: Vec<f64> = (0..n).map(|x| col(x, &|v| v.v_x.abs())).collect();
    let left = mean(mean_v_t[..half].iter().copied());
    let right = mean(mean_v_t[half..].iter().copied());
    let bulk = 1..n.saturating_sub(1).max(1);
    let bulk_peak_column = bulk
        .clone()
        .max_by(|&a, &b| mean_abs_v_x[a].total_cmp(&mean_abs_v_x[b]))
        .unwrap_or(0);
    let interface_columns = [half.saturating_sub(1), half];
    TwoArrowsSummary {
        left_mean_v_t: left,
        right_mean_v_t: right,
        opposite_arrows: left * right < 0.0,
        peak_at_interface: interface_columns.contains(&bulk_peak_column),
        interface_columns,
        bulk_peak_column,
        mean_v_t,
        mean_abs_v_x,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RevivalSummary {
    /// Interior slice times.
    pub times: Vec<f64>,
    /// Bulk-averaged `v_t` per slice.
    pub bulk_v_t: Vec<f64>,
    /// Bulk-averaged von Neumann entropy per slice.
    pub bulk_entropy: Vec<f64>,
    /// `r(sign v_t, S)`.
    pub r_sign_entropy: f64,
    /// `r(v_t, S)`.
    pub r_v_t_entropy: f64,
    /// `r(sign v_t, dS/dt)`, central differences.
    pub r_sign_entropy_rate: f64,
    /// `r(v_t, dS/dt)`.
    pub r_v_t_entropy_rate: f64,
    pub sign_flips: usize,
}

/// Correlations between the bulk arrow and the bulk entropy. Columns
/// `1..n-1` form the bulk.
pub fn revival_summary(field: &AotField, dt: f64) -> RevivalSummary {
    let n = field.vectors[0].len();
    let bulk: Vec<usize> = if n > 2 { (1..n - 1).collect() } else { (0..n).collect() };
    let ts: Vec<usize> = interior(field).collect();
    let bulk_v_t: Vec<f64> = ts.iter().map(|&t| mean(bulk.iter().map(|&x| field.get(t, x).v_t))).collect();
    let s_at = |t: usize| mean(bulk.iter().map(|&x| field.entropy.von_neumann[t][x]));
    let bulk_entropy: Vec<f64> = ts.iter().map(|&t| s_at(t)).collect();
    let rate: Vec<f64> = ts.iter().map(|&t| (s_at(t + 1) - s_at(t - 1)) / (2.0 * dt)).collect();
    let sign: Vec<f64> = bulk_v_t.iter().map(|v| v.signum()).collect();
    let sign_flips = sign.windows(2).filter(|w| w[0] != w[1]).count();
    RevivalSummary {
        times: ts.iter().map(|&t| t as f64 * dt).collect(),
        r_sign_entropy: pearson(&sign, &bulk_entropy),
        r_v_t_entropy: pearson(&bulk_v_t, &bulk_entropy),
        r_sign_entropy_rate: pearson(&sign, &rate),
        r_v_t_entropy_rate: pearson(&bulk_v_t, &rate),
        sign_flips,
        bulk_v_t,
        bulk_entropy,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PacketSummary {
    /// Excitation centre `sum x n_x / sum n_x`, `n_x = (1 - <Z_x>) / 2`, per slice.
    pub center: Vec<f64>,
    pub center_start: f64,
    pub center_end: f64,
    /// Time-averaged `v_x` per column.
    pub mean_v_x: Vec<f64>,
}

pub fn packet_summary(lattice: &SpacetimeLattice, field: &AotField) -> PacketSummary {
    let n = lattice.n_sites();
    let center: Vec<f64> = (0..=lattice.n_steps())
        .map(|k| {
            let s = lattice.slice(k);
            let occ: Vec<f64> =
                (0..n).map(|x| (1.0 - s.expectation(&PauliString::single(n, x, Pauli::Z)).re) / 2.0).collect();
            let tot: f64 = occ.iter().sum();
            occ.iter().enumerate().map(|(x, o)| x as f64 * o).sum::<f64>() / tot
        })
        .collect();
    let mean_v_x = (0..n).map(|x| mean(interior(field).map(|t| field.get(t, x).v_x))).collect();
    PacketSummary { center_start: center[0], center_end: *center.last().unwrap(), center, mean_v_x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-12);
        assert!((pearson(&a, &[8.0, 6.0, 4.0, 2.0]) + 1.0).abs() < 1e-12);
        assert!(pearson(&a, &[1.0; 4]).is_nan());
    }
}
