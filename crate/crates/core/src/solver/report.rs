use std::io::Write;

use super::{IncumbentKind, SolveReport, StopReason};
use crate::evaluator::{log_fields, LOG_HEADER};
use crate::problem::{format_value, ProblemInstance};

pub const HISTORY_FIXED_COLUMNS: [&str; 10] = [
    "ordinal",
    "stage",
    "f",
    "h",
    "n_viol_nonquant",
    "hidden_event",
    "sim_calls_used",
    "sim_status",
    "transcripts",
    "incumbent",
];

impl SolveReport {
    /// History as CSV: the evaluation log columns, the incumbent marker, then
    /// one column per variable.
    pub fn write_history_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = LOG_HEADER.to_vec();
        header.push("incumbent");
        header.extend(self.variable_names.iter().map(String::as_str));
        w.write_record(&header)?;
        for (i, row) in self.history.iter().enumerate() {
            let mut fields = log_fields(i + 1, &row.eval);
            fields.push(
                match row.incumbent {
                    Some(IncumbentKind::Feasible) => "feasible",
                    Some(IncumbentKind::Infeasible) => "infeasible",
                    None => "",
                }
                .to_string(),
            );
            fields.extend(row.eval.x.iter().map(|v| format_value(*v)));
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn history_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_history_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Human-readable summary.
    pub fn to_text(&self, instance: &ProblemInstance) -> String {
        let mut out = format!("problem: {}\n", self.problem);
        match &self.best {
            Some(s) => {
                out.push_str(&format!("best point: {}\n", instance.format_point(&s.x)));
                out.push_str(&format!("f: {}\nh: {}\n", format_value(s.f), format_value(s.h)));
                out.push_str(&format!("found at evaluation: {}\n", s.ordinal));
            }
            None => out.push_str("best point: none (no acceptable solution found)\n"),
        }
        let stop = match self.stop {
            StopReason::MeshConverged => "mesh size below minimum",
            StopReason::EvaluationBudget => "evaluation budget exhausted",
            StopReason::SimulationBudget => "simulation budget exhausted",
        };
        let c = &self.counters;
        out.push_str(&format!("stop: {stop}\n"));
        out.push_str(&format!(
            "final mesh size: {}\nfinal h_max: {}\n",
            format_value(self.final_delta),
            format_value(self.final_h_max)
        ));
        out.push_str(&format!("iterations: {}\n", c.iterations));
        out.push_str(&format!("points evaluated: {}\n", c.evaluations));
        out.push_str(&format!("rejected a priori: {}\n", c.rejected_a_priori));
        out.push_str(&format!("hidden events: {}\n", c.hidden_events));
        out.push_str(&format!("simulation requests: {}\n", c.sim_requests));
        out.push_str(&format!("simulations executed: {}\n", c.sim_executions));
        out.push_str(&format!("cache hits: {}\n", c.cache_hits));
        if c.restoration_evaluations > 0 {
            out.push_str(&format!("restoration evaluations: {}\n", c.restoration_evaluations));
        }
        let infeasible = self.history.iter().filter(|r| r.incumbent == Some(IncumbentKind::Infeasible)).count();
        out.push_str(&format!("infeasible incumbents: {infeasible}\n"));
        out
    }
}
