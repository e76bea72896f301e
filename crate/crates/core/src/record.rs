//! Per-run trajectory records.

/// Metrics captured at one recorded iteration. `k` is 1-based and refers to
/// the iterate *before* step `k` is applied, so `k = 1` is the initial point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub k: u64,
    pub alpha: f64,
    /// Full objective `F(w_k)`.
    pub f_value: f64,
    /// Squared full-gradient norm `‖∇F(w_k)‖²`.
    pub grad_norm_sq: f64,
    /// `‖w_k − w*‖` when the minimizer is known.
    pub dist_to_opt: Option<f64>,
}

/// Identifying metadata for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub method: String,
    pub schedule: String,
    pub problem: String,
    pub seed: u64,
    pub iters: u64,
    /// Index of the first iterate that left the admissible region, if any.
    pub diverged_at: Option<u64>,
}

/// The trajectory of one seeded run: scalar metrics at the recorded
/// iterations plus the final iterate. Full parameter histories are never
/// stored.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub meta: RunMeta,
    pub trace: Vec<TracePoint>,
    /// The iterate after the last completed step (or the offending iterate
    /// when the run diverged).
    pub final_w: Vec<f64>,
}

impl RunRecord {
    pub fn diverged(&self) -> bool {
        self.meta.diverged_at.is_some()
    }

    /// Distance of the final iterate to `w_star`.
    pub fn final_error(&self, w_star: &[f64]) -> f64 {
        self.final_w
            .iter()
            .zip(w_star)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// The trace CSV, one row per recorded iteration.
    ///
    /// Floats are written with 17 significant digits so the values round-trip
    /// exactly; the unknown-distance field is left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,alpha,f_value,grad_norm_sq,dist_to_opt\n");
        for p in &self.trace {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.k,
                format_float(p.alpha),
                format_float(p.f_value),
                format_float(p.grad_norm_sq),
                p.dist_to_opt.map(format_float).unwrap_or_default()
            ));
        }
        out
    }
}

/// 17 significant digits, enough to reproduce any f64 exactly on parse.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}
