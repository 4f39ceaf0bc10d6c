//! Index histograms and summary figures for a result file.

use serde::Serialize;

use crate::files::ResultFile;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub instance_label: String,
    pub solutions: usize,
    pub singular: usize,
    pub spurious: usize,
    pub energy_min: Option<f64>,
    pub energy_max: Option<f64>,
    /// Count of solutions per Hessian index `0..=n`.
    pub histogram: Vec<usize>,
    /// `"i,count"` pairs joined by spaces.
    pub histogram_row: String,
}

impl Report {
    pub fn new(r: &ResultFile) -> Self {
        let pts = &r.solutions.points;
        let histogram = r.solutions.index_histogram(r.dimension);
        let histogram_row = histogram
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{i},{c}"))
            .collect::<Vec<_>>()
            .join(" ");
        Report {
            instance_label: r.instance_label.clone(),
            solutions: pts.len(),
            singular: r.solutions.singular_count(),
            spurious: r.campaign_stats.counts.spurious,
            energy_min: pts.iter().map(|p| p.energy).min_by(f64::total_cmp),
            energy_max: pts.iter().map(|p| p.energy).max_by(f64::total_cmp),
            histogram,
            histogram_row,
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let mut out = String::from("kind,key,value\n");
        out += &format!("summary,instance,{}\n", self.instance_label);
        out += &format!("summary,solutions,{}\n", self.solutions);
        out += &format!("summary,singular,{}\n", self.singular);
        out += &format!("summary,spurious,{}\n", self.spurious);
        out += &format!("summary,energy_min,{}\n", opt(self.energy_min));
        out += &format!("summary,energy_max,{}\n", opt(self.energy_max));
        out += &format!("summary,histogram,\"{}\"\n", self.histogram_row);
        for (i, c) in self.histogram.iter().enumerate() {
            out += &format!("index,{i},{c}\n");
        }
        out
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        Ok(String::from_utf8(crate::json::to_bytes(self)?)?)
    }
}
