//! The differentiability contract: a uniform forward/VJP interface over
//! flattened buffers, a finite-difference verification harness, and a
//! fixed-composition backward pass for assembled pipelines.

pub mod ops;

use crate::error::{GeoError, Result};
use crate::rng;

/// A differentiable operation over flat `f64` buffers.
///
/// `forward` maps the input slots to one output buffer; `vjp` pulls an
/// output cotangent back to one cotangent per input slot. Implementations
/// must keep `vjp` linear in the upstream cotangent. Operations with
/// discrete internal choices (nearest neighbors, pixel owners) expose them
/// through `signature` so the checker can skip probes that cross a
/// discontinuity.
pub trait DiffOp {
    fn name(&self) -> &str;
    fn input_sizes(&self) -> Vec<usize>;
    fn output_size(&self) -> usize;
    fn forward(&self, inputs: &[Vec<f64>]) -> Vec<f64>;
    fn vjp(&self, inputs: &[Vec<f64>], upstream: &[f64]) -> Vec<Vec<f64>>;
    /// Hash of all discrete choices made by `forward` at these inputs.
    fn signature(&self, _inputs: &[Vec<f64>]) -> Option<u64> {
        None
    }
}

/// One directional probe of `check_vjp`.
#[derive(Debug, Clone)]
pub struct FdProbe {
    pub analytic: f64,
    pub finite_difference: f64,
    pub relative_error: f64,
    pub passed: bool,
    pub skipped: bool,
}

/// Outcome of a finite-difference check.
#[derive(Debug, Clone)]
pub struct FdReport {
    pub op_name: String,
    pub probes: Vec<FdProbe>,
    pub failures: usize,
    pub skipped: usize,
    /// Maximum relative error over non-skipped probes.
    pub max_relative_error: f64,
    /// Worst deviation of `vjp(2u)` from `2 vjp(u)` (probe 0 only).
    pub linearity_error: f64,
}

impl FdReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn random_unit(seed: u64, probe: u64, stream_base: u64, len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len)
        .map(|i| rng::uniform(seed, probe * 0x1_0000_0000 + i as u64, stream_base) - 0.5)
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

fn relative_error(a: f64, f: f64) -> f64 {
    (a - f).abs() / a.abs().max(f.abs()).max(1e-8)
}

/// Compare the analytic VJP against central finite differences along
/// `probes` random directions.
///
/// For each probe a random unit upstream cotangent `u` and a random unit
/// input direction `v` are drawn; `<vjp(u), v>` is compared against
/// `(L(x + eps v) - L(x - eps v)) / (2 eps)` with `L(y) = <u, forward(y)>`.
/// Probes whose discrete signature differs between the two evaluation
/// points are skipped and counted; more than 20% skipped is inconclusive.
pub fn check_vjp(
    op: &dyn DiffOp,
    inputs: &[Vec<f64>],
    probes: usize,
    eps: f64,
    tol: f64,
    seed: u64,
) -> Result<FdReport> {
    let sizes = op.input_sizes();
    if sizes.len() != inputs.len() {
        return Err(GeoError::Config(format!(
            "{} input slots supplied to an op with {}",
            inputs.len(),
            sizes.len()
        )));
    }
    for (slot, (buf, &size)) in inputs.iter().zip(&sizes).enumerate() {
        if buf.len() != size {
            return Err(GeoError::Config(format!(
                "input slot {slot} has {} values, expected {size}",
                buf.len()
            )));
        }
    }
    if !(eps > 0.0 && tol > 0.0 && probes > 0) {
        return Err(GeoError::Config("probes, eps and tol must be positive".into()));
    }

    let total_len: usize = sizes.iter().sum();
    let out_len = op.output_size();
    let mut report = FdReport {
        op_name: op.name().to_string(),
        probes: Vec::with_capacity(probes),
        failures: 0,
        skipped: 0,
        max_relative_error: 0.0,
        linearity_error: 0.0,
    };

    for probe in 0..probes {
        let u = random_unit(seed, probe as u64, 1, out_len);
        let v = random_unit(seed, probe as u64, 2, total_len);

        // Analytic directional derivative via the VJP.
        let grads = op.vjp(inputs, &u);
        let mut analytic = 0.0;
        let mut offset = 0;
        for (slot, grad) in grads.iter().enumerate() {
            debug_assert_eq!(grad.len(), sizes[slot]);
            for (g, d) in grad.iter().zip(&v[offset..offset + sizes[slot]]) {
                analytic += g * d;
            }
            offset += sizes[slot];
        }

        if probe == 0 {
            // Linearity of the VJP in its upstream argument.
            let u2: Vec<f64> = u.iter().map(|x| 2.0 * x).collect();
            let grads2 = op.vjp(inputs, &u2);
            let mut worst = 0.0f64;
            for (g2, g1) in grads2.iter().zip(&grads) {
                for (a, b) in g2.iter().zip(g1) {
                    worst = worst.max((a - 2.0 * b).abs());
                }
            }
            report.linearity_error = worst;
        }

        // Perturbed inputs for the central difference.
        let perturb = |sign: f64| -> Vec<Vec<f64>> {
            let mut out = Vec::with_capacity(inputs.len());
            let mut offset = 0;
            for (slot, buf) in inputs.iter().enumerate() {
                let mut b = buf.clone();
                for (x, d) in b.iter_mut().zip(&v[offset..offset + sizes[slot]]) {
                    *x += sign * eps * d;
                }
                offset += sizes[slot];
                out.push(b);
            }
            out
        };
        let plus = perturb(1.0);
        let minus = perturb(-1.0);

        let skipped = match (op.signature(&plus), op.signature(&minus)) {
            (Some(a), Some(b)) => a != b,
            _ => false,
        };
        if skipped {
            report.skipped += 1;
            report.probes.push(FdProbe {
                analytic,
                finite_difference: f64::NAN,
                relative_error: f64::NAN,
                passed: true,
                skipped: true,
            });
            continue;
        }

        let f_plus = op.forward(&plus);
        let f_minus = op.forward(&minus);
        // Subtract outputs before projecting onto u: the per-coordinate
        // differences are small, which keeps cancellation mild.
        let fd = f_plus
            .iter()
            .zip(&f_minus)
            .zip(&u)
            .map(|((p, m), w)| (p - m) * w)
            .sum::<f64>()
            / (2.0 * eps);

        let rel = relative_error(analytic, fd);
        let passed = rel <= tol;
        if !passed {
            report.failures += 1;
        }
        report.max_relative_error = report.max_relative_error.max(rel);
        report.probes.push(FdProbe {
            analytic,
            finite_difference: fd,
            relative_error: rel,
            passed,
            skipped: false,
        });
    }

    if report.linearity_error > 1e-10 {
        report.failures += 1;
    }
    if report.skipped * 5 > probes {
        return Err(GeoError::InconclusiveCheck {
            skipped: report.skipped,
            total: probes,
        });
    }
    Ok(report)
}

/// Reverse accumulation through an explicit, fixed stage list.
///
/// Each stage must take exactly one input slot whose size matches the
/// previous stage's output; `loss` maps the final output to a scalar.
/// Returns the loss value and the gradient with respect to the first
/// stage's input.
pub fn backward_pipeline(
    stages: &[&dyn DiffOp],
    input: &[f64],
    loss: &dyn DiffOp,
) -> Result<(f64, Vec<f64>)> {
    let mut current = input.to_vec();
    let mut saved: Vec<Vec<f64>> = Vec::with_capacity(stages.len());
    for (k, stage) in stages.iter().enumerate() {
        let sizes = stage.input_sizes();
        if sizes.len() != 1 {
            return Err(GeoError::Config(format!(
                "pipeline stage {k} ({}) must take exactly one input slot",
                stage.name()
            )));
        }
        if sizes[0] != current.len() {
            return Err(GeoError::Config(format!(
                "pipeline stage {k} ({}) expects {} values but receives {}",
                stage.name(),
                sizes[0],
                current.len()
            )));
        }
        saved.push(current.clone());
        current = stage.forward(&[current]);
    }
    let loss_sizes = loss.input_sizes();
    if loss_sizes.len() != 1 || loss_sizes[0] != current.len() || loss.output_size() != 1 {
        return Err(GeoError::Config(format!(
            "loss {} must map the final stage output to a scalar",
            loss.name()
        )));
    }
    let value = loss.forward(&[current.clone()])[0];

    let mut upstream = loss.vjp(&[current], &[1.0]).remove(0);
    for (stage, stage_input) in stages.iter().zip(saved.iter()).rev() {
        upstream = stage.vjp(&[stage_input.clone()], &upstream).remove(0);
    }
    Ok((value, upstream))
}

/// Two single-input ops fused into one, for composition and grouping tests.
pub struct ComposeOp {
    pub first: Box<dyn DiffOp>,
    pub second: Box<dyn DiffOp>,
    name: String,
}

impl ComposeOp {
    pub fn new(first: Box<dyn DiffOp>, second: Box<dyn DiffOp>) -> Result<ComposeOp> {
        if first.input_sizes().len() != 1 || second.input_sizes().len() != 1 {
            return Err(GeoError::Config("composition requires single-input ops".into()));
        }
        if second.input_sizes()[0] != first.output_size() {
            return Err(GeoError::Config(format!(
                "cannot compose {} ({} outputs) into {} ({} inputs)",
                first.name(),
                first.output_size(),
                second.name(),
                second.input_sizes()[0]
            )));
        }
        let name = format!("{}.{}", second.name(), first.name());
        Ok(ComposeOp { first, second, name })
    }
}

impl DiffOp for ComposeOp {
    fn name(&self) -> &str {
        &self.name
    }

    fn input_sizes(&self) -> Vec<usize> {
        self.first.input_sizes()
    }

    fn output_size(&self) -> usize {
        self.second.output_size()
    }

    fn forward(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        let mid = self.first.forward(inputs);
        self.second.forward(&[mid])
    }

    fn vjp(&self, inputs: &[Vec<f64>], upstream: &[f64]) -> Vec<Vec<f64>> {
        let mid = self.first.forward(inputs);
        let g_mid = self.second.vjp(&[mid], upstream).remove(0);
        self.first.vjp(inputs, &g_mid)
    }

    fn signature(&self, inputs: &[Vec<f64>]) -> Option<u64> {
        let a = self.first.signature(inputs);
        let mid = self.first.forward(inputs);
        let b = self.second.signature(&[mid]);
        match (a, b) {
            (None, None) => None,
            (x, y) => Some(
                x.unwrap_or(0)
                    .wrapping_mul(0x9E3779B97F4A7C15)
                    .wrapping_add(y.unwrap_or(0)),
            ),
        }
    }
}
