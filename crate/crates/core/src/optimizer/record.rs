use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::baselines::{ArchitectureDescriptor, FdSolution, HbfSolution};
use crate::error::Result;
use crate::geometry::BlockLayout;
use crate::model::{HardwareCounts, IsacProblem, Metrics, PowerModel};

use super::Solution;

/// Portable form of a beamformer design. Complex entries serialize as
/// `[re, im]` pairs.
///
/// For the tri-hybrid design `f` holds the per-waveguide analog phases and
/// `psi` the Lorentzian phases. A fully-digital precoder is stored in `f`
/// with `w = 1`, and a phase-shifter hybrid design stores its per-antenna
/// phases in `f`; both leave `psi` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub architecture: Option<ArchitectureDescriptor>,
    pub w_re: f64,
    pub w_im: f64,
    pub f: Vec<Complex64>,
    pub psi: Vec<Complex64>,
    pub metrics: Metrics,
}

impl SolutionRecord {
    pub fn tagged(mut self, descriptor: ArchitectureDescriptor) -> Self {
        self.architecture = Some(descriptor);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl Solution {
    pub fn record(
        &self,
        problem: &IsacProblem,
        layout: BlockLayout,
        model: &PowerModel,
        counts: HardwareCounts,
    ) -> Result<SolutionRecord> {
        let w = self.digital.value;
        Ok(SolutionRecord {
            architecture: None,
            w_re: w.re,
            w_im: w.im,
            f: self.analog.weights().to_vec(),
            psi: self.dma.phases().to_vec(),
            metrics: self.metrics(problem, layout, model, counts)?,
        })
    }
}

impl FdSolution {
    pub fn record(
        &self,
        problem: &IsacProblem,
        descriptor: ArchitectureDescriptor,
        model: &PowerModel,
    ) -> Result<SolutionRecord> {
        Ok(SolutionRecord {
            architecture: Some(descriptor),
            w_re: 1.0,
            w_im: 0.0,
            f: self.precoder.clone(),
            psi: Vec::new(),
            metrics: Metrics::of_beam(problem, &self.precoder, model, descriptor.counts)?,
        })
    }
}

impl HbfSolution {
    pub fn record(
        &self,
        problem: &IsacProblem,
        descriptor: ArchitectureDescriptor,
        model: &PowerModel,
    ) -> Result<SolutionRecord> {
        Ok(SolutionRecord {
            architecture: Some(descriptor),
            w_re: self.digital.re,
            w_im: self.digital.im,
            f: self.phases.clone(),
            psi: Vec::new(),
            metrics: Metrics::of_beam(problem, &self.transmit_beam(), model, descriptor.counts)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{solve_fd, solve_hbf, ArchitectureKind};
    use crate::harness::{build_instance, ScenarioConfig};
    use crate::optimizer::solve;

    fn config() -> ScenarioConfig {
        ScenarioConfig {
            n_waveguides: 2,
            elements_per_waveguide: 4,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn tri_hybrid_record_round_trips() {
        let c = config();
        let inst = build_instance(&c, ArchitectureKind::TriHybrid, 4, 0.5).unwrap();
        let layout = inst.geometry.layout();
        let sol = solve(&inst.problem, layout, &inst.gains, &c.solver.with_seed(4)).unwrap();
        let rec = sol
            .record(
                &inst.problem,
                layout,
                &c.power_model,
                inst.descriptor.counts,
            )
            .unwrap()
            .tagged(inst.descriptor);
        assert_eq!(rec.f.len(), 2);
        assert_eq!(rec.psi.len(), 8);
        assert!((rec.metrics.tx_power_mw - inst.problem.power_budget).abs() < 1e-9);

        let text = rec.to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["w_re", "w_im", "f", "psi", "metrics", "architecture"] {
            assert!(value.get(key).is_some(), "{key}");
        }
        assert_eq!(value["f"][0].as_array().unwrap().len(), 2);
        assert_eq!(SolutionRecord::from_json(&text).unwrap(), rec);
    }

    #[test]
    fn untagged_record_omits_the_architecture() {
        let c = config();
        let inst = build_instance(&c, ArchitectureKind::TriHybrid, 0, 1.0).unwrap();
        let layout = inst.geometry.layout();
        let sol = solve(&inst.problem, layout, &inst.gains, &c.solver).unwrap();
        let rec = sol
            .record(
                &inst.problem,
                layout,
                &c.power_model,
                inst.descriptor.counts,
            )
            .unwrap();
        assert!(!rec.to_json().unwrap().contains("architecture"));
    }

    #[test]
    fn baseline_records_carry_their_descriptor() {
        let c = config();
        for kind in [ArchitectureKind::FdSn, ArchitectureKind::HbfSa] {
            let inst = build_instance(&c, kind, 2, 0.075).unwrap();
            let rec = if kind.is_fully_digital() {
                solve_fd(&inst.problem).unwrap().record(
                    &inst.problem,
                    inst.descriptor,
                    &c.power_model,
                )
            } else {
                solve_hbf(&inst.problem, &inst.descriptor, &c.solver)
                    .unwrap()
                    .record(&inst.problem, inst.descriptor, &c.power_model)
            }
            .unwrap();
            assert_eq!(rec.architecture.unwrap().kind, kind);
            assert_eq!(rec.f.len(), inst.descriptor.n_antennas);
            assert!(rec.psi.is_empty());
            assert!(
                (rec.metrics.tx_power_mw - inst.problem.power_budget).abs()
                    < 1e-9 * inst.problem.power_budget
            );
        }
    }
}
