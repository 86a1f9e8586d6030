use serde::Serialize;

/// Result of one scenario run. The CSV form echoes `params` in every row and
/// leaves out the runtime, so identical inputs give identical bytes.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub params: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// `|counting operator| / N^D`, when the scenario computes it.
    pub delta: Option<f64>,
    /// Box description and norm power.
    pub norm_powers: Vec<(String, f64)>,
    pub ratios: Vec<(String, f64)>,
    /// Failed checks; a nonempty list means exit code 1.
    pub failures: Vec<String>,
    /// Human-readable log printed to stderr.
    pub log: String,
    /// Structured export written instead of CSV (PET traces).
    pub json: Option<serde_json::Value>,
    pub runtime_ms: u128,
}

impl ExperimentReport {
    pub fn new(scenario: &str, params: Vec<(String, String)>, columns: &[&str]) -> Self {
        ExperimentReport {
            scenario: scenario.to_string(),
            params,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("scenario")
            .chain(self.params.iter().map(|(k, _)| k.as_str()))
            .chain(self.columns.iter().map(|c| c.as_str()))
            .collect();
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let rec: Vec<&str> = std::iter::once(self.scenario.as_str())
                .chain(self.params.iter().map(|(_, v)| v.as_str()))
                .chain(row.iter().map(|c| c.as_str()))
                .collect();
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Compact float formatting; `nan` stays readable.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "nan".to_string()
    }
}
