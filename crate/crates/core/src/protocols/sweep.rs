//! Squeezing sweeps of the three-step protocol.

use serde::Serialize;

use super::{run_improved_protocol, NoiseSetting, ProtocolParams, ASYMPTOTIC_NU};
use crate::error::{invalid, Result};
use crate::gaussianops::Squeezing;
use crate::par;

/// One grid point: `e2t,x,tau3,omega3,sigma,nu,log_negativity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub e2t: f64,
    pub x: f64,
    pub tau3: f64,
    pub omega3: f64,
    pub sigma: f64,
    pub nu: f64,
    pub log_negativity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// `ν` strictly decreasing along the grid.
    pub nu_strictly_decreasing: bool,
    /// `|ν_last - 1/3|`.
    pub asymptote_gap: f64,
}

/// `points` values of `e^{2t}` spaced geometrically from `start` to `stop`
/// inclusive.
pub fn geometric_grid(start: f64, stop: f64, points: usize) -> Result<Vec<Squeezing>> {
    if points == 0 {
        return invalid("grid needs at least one point");
    }
    if !(start >= 1.0 && stop >= start && stop.is_finite()) {
        return invalid(format!(
            "grid bounds must satisfy 1 <= start <= stop, got {start}..{stop}"
        ));
    }
    if points == 1 {
        return Ok(vec![Squeezing::from_e2t(start)?]);
    }
    let ratio = (stop / start).ln() / (points - 1) as f64;
    (0..points)
        .map(|k| {
            let e = if k == points - 1 {
                stop
            } else {
                start * (ratio * k as f64).exp()
            };
            Squeezing::from_e2t(e)
        })
        .collect()
}

/// Runs the three-step protocol on every grid point, rows in grid order.
pub fn sweep(grid: &[Squeezing], noise: NoiseSetting, excess: f64) -> Result<SweepTable> {
    if grid.is_empty() {
        return invalid("sweep grid is empty");
    }
    let rows = par::map_indexed(grid.len(), |k| {
        let params = ProtocolParams::new(grid[k], noise, excess)?;
        let r = run_improved_protocol(&params)?;
        Ok(SweepRow {
            e2t: params.squeezing.e2t(),
            x: params.x(),
            tau3: r.entanglement.tau3,
            omega3: r.entanglement.omega3,
            sigma: r.entanglement.sigma,
            nu: r.entanglement.nu,
            log_negativity: r.entanglement.log_negativity,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let nu_strictly_decreasing = rows.windows(2).all(|w| w[1].nu < w[0].nu);
    let asymptote_gap = (rows.last().expect("non-empty").nu - ASYMPTOTIC_NU).abs();
    Ok(SweepTable {
        rows,
        nu_strictly_decreasing,
        asymptote_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_endpoints_and_spacing() {
        let g = geometric_grid(2.0, 1e6, 20).unwrap();
        assert_eq!(g.len(), 20);
        assert_eq!(g[0].e2t(), 2.0);
        assert_eq!(g[19].e2t(), 1e6);
        let r1 = g[1].e2t() / g[0].e2t();
        let r2 = g[10].e2t() / g[9].e2t();
        assert_abs_diff_eq!(r1, r2, epsilon = 1e-9);
        assert!(geometric_grid(2.0, 1.0, 5).is_err());
        assert!(geometric_grid(0.5, 2.0, 5).is_err());
        assert!(geometric_grid(2.0, 3.0, 0).is_err());
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(sweep(&[], NoiseSetting::Auto, 0.0).is_err());
    }

    #[test]
    fn single_point_matches_protocol_run() {
        let s = Squeezing::from_e2t(2.0).unwrap();
        let t = sweep(&[s], NoiseSetting::Auto, 0.0).unwrap();
        let r = run_improved_protocol(&ProtocolParams::at_threshold(s)).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].nu, r.nu());
        assert_eq!(t.rows[0].log_negativity, r.log_negativity());
        assert_eq!(t.rows[0].x, 0.5);
    }

    #[test]
    fn nu_decreases_towards_one_third() {
        let grid = geometric_grid(2.0, 1e6, 30).unwrap();
        let t = sweep(&grid, NoiseSetting::Auto, 0.0).unwrap();
        assert!(t.nu_strictly_decreasing);
        assert!(t.asymptote_gap < 1e-3);
        assert_abs_diff_eq!(t.rows.last().unwrap().log_negativity, 1.585, epsilon = 2e-3);
    }
}
