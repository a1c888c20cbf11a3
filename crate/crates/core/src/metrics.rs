//! Acceptance, revenue, cost and revenue/cost metrics over time windows.
//!
//! Revenue and cost are booked at acceptance time into the window of the
//! request's arrival. A window that saw no arrivals has no acceptance
//! sample, and a window with zero cost has no revenue/cost sample; both are
//! `None` rather than `0/0`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Embedding, VirtualNetworkRequest};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("invalid revenue weights: {0}")]
    InvalidWeights(String),
    #[error("window width must be positive, got {0}")]
    InvalidWindow(f64),
}

/// Node/link weighting of revenue; the two weights sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevenueWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for RevenueWeights {
    fn default() -> Self {
        RevenueWeights { alpha: 0.5, beta: 0.5 }
    }
}

impl RevenueWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, MetricsError> {
        if !(alpha >= 0.0 && beta >= 0.0) || (alpha + beta - 1.0).abs() > 1e-9 {
            return Err(MetricsError::InvalidWeights(format!(
                "need alpha, beta >= 0 with alpha + beta = 1, got ({alpha}, {beta})"
            )));
        }
        Ok(RevenueWeights { alpha, beta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostMode {
    /// Each mapped link counts its bandwidth once, whatever the path length.
    Literal,
    /// Bandwidth is charged once per substrate hop.
    #[default]
    HopWeighted,
}

impl std::str::FromStr for CostMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(CostMode::Literal),
            "hop" | "hop-weighted" => Ok(CostMode::HopWeighted),
            other => Err(format!("unknown cost mode '{other}' (expected literal or hop)")),
        }
    }
}

/// α·Σcpu + β·Σbw of the request.
pub fn revenue(vnr: &VirtualNetworkRequest, w: RevenueWeights) -> f64 {
    w.alpha * vnr.total_cpu() as f64 + w.beta * vnr.total_bw() as f64
}

/// Same as [`revenue`] but from the demands copied into an embedding.
pub fn embedding_revenue(emb: &Embedding, w: RevenueWeights) -> f64 {
    w.alpha * emb.total_cpu() as f64 + w.beta * emb.total_bw() as f64
}

pub fn cost(emb: &Embedding, mode: CostMode) -> f64 {
    let link_term = match mode {
        CostMode::Literal => emb.total_bw(),
        CostMode::HopWeighted => emb.bw_hops(),
    };
    (emb.total_cpu() + link_term) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub arrived: u64,
    pub accepted: u64,
    pub revenue_sum: f64,
    pub cost_sum: f64,
}

impl MetricWindow {
    pub fn width(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Accepted over arrived; `None` when nothing arrived.
pub fn acceptance_rate(w: &MetricWindow) -> Option<f64> {
    (w.arrived > 0).then(|| w.accepted as f64 / w.arrived as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowMetrics {
    pub window: MetricWindow,
    pub acceptance: Option<f64>,
    pub avg_revenue: f64,
    pub avg_cost: f64,
    pub rc_ratio: Option<f64>,
}

impl WindowMetrics {
    pub fn from_window(window: MetricWindow) -> Self {
        let avg_revenue = window.revenue_sum / window.width();
        let avg_cost = window.cost_sum / window.width();
        WindowMetrics {
            window,
            acceptance: acceptance_rate(&window),
            avg_revenue,
            avg_cost,
            rc_ratio: (avg_cost > 0.0).then(|| avg_revenue / avg_cost),
        }
    }
}

/// Running totals from time zero up to the end of each window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulativeMetrics {
    pub t_end: f64,
    pub arrived: u64,
    pub accepted: u64,
    pub acceptance: Option<f64>,
    pub revenue: f64,
    pub cost: f64,
    pub rc_ratio: Option<f64>,
}

/// Streaming aggregation over fixed-width windows `[k·w, (k+1)·w)`; the
/// final window is cut at the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsAccumulator {
    width: f64,
    horizon: f64,
    windows: Vec<MetricWindow>,
}

impl MetricsAccumulator {
    pub fn new(width: f64, horizon: f64) -> Result<Self, MetricsError> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(MetricsError::InvalidWindow(width));
        }
        let count = if horizon > 0.0 { (horizon / width).ceil() as usize } else { 0 };
        let windows = (0..count)
            .map(|k| MetricWindow {
                t_start: k as f64 * width,
                t_end: ((k + 1) as f64 * width).min(horizon),
                arrived: 0,
                accepted: 0,
                revenue_sum: 0.0,
                cost_sum: 0.0,
            })
            .collect();
        Ok(MetricsAccumulator { width, horizon, windows })
    }

    fn slot(&mut self, arrival: f64) -> Option<&mut MetricWindow> {
        if !(0.0..self.horizon).contains(&arrival) {
            return None;
        }
        let k = ((arrival / self.width) as usize).min(self.windows.len() - 1);
        self.windows.get_mut(k)
    }

    /// Books one arrival. Arrivals outside `[0, horizon)` are ignored.
    pub fn record_arrival(&mut self, arrival: f64, outcome: Option<(f64, f64)>) {
        if let Some(w) = self.slot(arrival) {
            w.arrived += 1;
            if let Some((revenue, cost)) = outcome {
                w.accepted += 1;
                w.revenue_sum += revenue;
                w.cost_sum += cost;
            }
        }
    }

    pub fn windows(&self) -> &[MetricWindow] {
        &self.windows
    }

    pub fn series(&self) -> Vec<WindowMetrics> {
        self.windows.iter().copied().map(WindowMetrics::from_window).collect()
    }

    pub fn cumulative(&self) -> Vec<CumulativeMetrics> {
        let mut out = Vec::with_capacity(self.windows.len());
        let (mut arrived, mut accepted, mut revenue, mut cost) = (0, 0, 0.0, 0.0);
        for w in &self.windows {
            arrived += w.arrived;
            accepted += w.accepted;
            revenue += w.revenue_sum;
            cost += w.cost_sum;
            out.push(CumulativeMetrics {
                t_end: w.t_end,
                arrived,
                accepted,
                acceptance: (arrived > 0).then(|| accepted as f64 / arrived as f64),
                revenue,
                cost,
                rc_ratio: (cost > 0.0).then(|| revenue / cost),
            });
        }
        out
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const SERIES_HEADER: [&str; 8] = [
    "t_start",
    "t_end",
    "arrived",
    "accepted",
    "acceptance",
    "avg_revenue",
    "avg_cost",
    "rc_ratio",
];

/// Writes the per-window CSV; missing samples are empty fields.
pub fn write_series_csv<W: Write>(out: W, series: &[WindowMetrics]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(SERIES_HEADER)?;
    for m in series {
        wtr.write_record([
            m.window.t_start.to_string(),
            m.window.t_end.to_string(),
            m.window.arrived.to_string(),
            m.window.accepted.to_string(),
            opt(m.acceptance),
            m.avg_revenue.to_string(),
            m.avg_cost.to_string(),
            opt(m.rc_ratio),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_cumulative_csv<W: Write>(out: W, series: &[CumulativeMetrics]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["t_end", "arrived", "accepted", "acceptance", "revenue", "cost", "rc_ratio"])?;
    for m in series {
        wtr.write_record([
            m.t_end.to_string(),
            m.arrived.to_string(),
            m.accepted.to_string(),
            opt(m.acceptance),
            m.revenue.to_string(),
            m.cost.to_string(),
            opt(m.rc_ratio),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Mean and population standard deviation of the sampled values.
pub fn mean_std(values: impl IntoIterator<Item = f64>) -> Option<(f64, f64)> {
    let v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        return None;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
    Some((mean, var.sqrt()))
}
