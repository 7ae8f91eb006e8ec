//! Timing sweeps over generated instances.

use std::time::Instant;

use hmatch::flow::gap_bound;
use hmatch::{generate, solve, Algorithm, GeneratorConfig, SolveError, SolveOptions};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub density: f64,
    pub max_b: u64,
    pub max_c: u64,
    pub depth: usize,
    pub branching: (usize, usize),
    pub seed: u64,
    pub algo: Algorithm,
    pub options: SolveOptions,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![100, 200, 400, 800],
            trials: 3,
            density: 0.05,
            max_b: 3,
            max_c: 2,
            depth: 3,
            branching: (2, 4),
            seed: 1,
            algo: Algorithm::Poly,
            options: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub trial: usize,
    pub edges: usize,
    pub sets: usize,
    pub size: u64,
    pub rounded: Option<u64>,
    pub augmentations: u64,
    pub gap_bound: u64,
    pub elapsed_us: u64,
}

pub const CSV_HEADER: &str = "n,trial,edges,sets,size,rounded,augmentations,gap_bound,elapsed_us";

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.trial,
            self.edges,
            self.sets,
            self.size,
            self.rounded.map(|r| r.to_string()).unwrap_or_default(),
            self.augmentations,
            self.gap_bound,
            self.elapsed_us
        )
    }
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    /// `(n, median elapsed microseconds)` per size.
    pub medians: Vec<(usize, u64)>,
    /// Least-squares slope of log time against log n.
    pub slope: Option<f64>,
}

/// Runs the sweep sequentially so timings do not interfere.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchResult, SolveError> {
    let mut rows = Vec::new();
    let mut medians = Vec::new();
    for &n in &cfg.sizes {
        let mut times = Vec::with_capacity(cfg.trials);
        for trial in 0..cfg.trials {
            let inst = generate(&GeneratorConfig {
                n,
                density: cfg.density,
                max_b: cfg.max_b,
                max_c: cfg.max_c,
                depth: cfg.depth,
                branching: cfg.branching,
                max_edges: None,
                seed: cfg.seed.wrapping_add((n as u64) << 20).wrapping_add(trial as u64),
            });
            let start = Instant::now();
            let report = solve(&inst, cfg.algo, &cfg.options)?;
            let elapsed_us = start.elapsed().as_micros() as u64;
            times.push(elapsed_us);
            rows.push(BenchRow {
                n,
                trial,
                edges: inst.edge_count(),
                sets: inst.set_count(),
                size: report.cardinality,
                rounded: report.counters.rounded_size,
                augmentations: report.counters.augmentations,
                gap_bound: gap_bound(n),
                elapsed_us,
            });
        }
        times.sort_unstable();
        if let Some(&mid) = times.get(times.len() / 2) {
            medians.push((n, mid));
        }
    }
    let points: Vec<(f64, f64)> = medians
        .iter()
        .map(|&(n, t)| ((n as f64).ln(), (t.max(1) as f64).ln()))
        .collect();
    Ok(BenchResult {
        rows,
        slope: loglog_slope(&points),
        medians,
    })
}

/// Least-squares slope through `(x, y)` points; `None` with fewer than two
/// distinct x values.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let k = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [10.0f64, 20.0, 40.0, 80.0].iter().map(|&n| (n.ln(), (3.0 * n.powf(2.5)).ln())).collect();
        assert!((loglog_slope(&pts).unwrap() - 2.5).abs() < 1e-9);
        assert_eq!(loglog_slope(&pts[..1]), None);
        assert_eq!(loglog_slope(&[(1.0, 1.0), (1.0, 2.0)]), None);
    }

    #[test]
    fn small_sweep_reports_every_trial() {
        let cfg = BenchConfig {
            sizes: vec![10, 20],
            trials: 2,
            density: 0.3,
            ..Default::default()
        };
        let r = run_bench(&cfg).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert_eq!(r.medians.len(), 2);
        assert!(r.slope.is_some());
        for row in &r.rows {
            assert!(row.augmentations <= row.gap_bound);
            assert_eq!(row.csv().split(',').count(), CSV_HEADER.split(',').count());
        }
    }
}
