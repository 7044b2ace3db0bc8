//! Configuration files, run manifests and result tables.
//!
//! Config files are TOML. Angles there are degrees, with the unit in the key
//! name (`phi_max_deg`); everything past this module is radians.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize, Serializer};

use crate::geometry::{Correspondence, Measurement, SonarConfig, WorldPoint};
use crate::pipeline::Case;
use crate::sim::{
    Aabb, ExperimentGrid, OutlierModel, RDistStudy, ResultsTable, ScenarioConfig, TimingRow,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SonarSection {
    pub theta_max_deg: f64,
    pub phi_max_deg: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub sigma_r: f64,
    pub sigma_theta_deg: f64,
    /// Defaults to `3 * sigma_r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_r: Option<f64>,
    /// Defaults to `3 * sigma_theta_deg`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_theta_deg: Option<f64>,
}

impl Default for SonarSection {
    fn default() -> Self {
        Self::from_sonar(&SonarConfig::default())
    }
}

impl SonarSection {
    pub fn from_sonar(s: &SonarConfig) -> Self {
        Self {
            theta_max_deg: s.theta_max.to_degrees(),
            phi_max_deg: s.phi_max.to_degrees(),
            r_min: s.r_min,
            r_max: s.r_max,
            sigma_r: s.sigma_r,
            sigma_theta_deg: s.sigma_theta.to_degrees(),
            beta_r: Some(s.beta_r),
            beta_theta_deg: Some(s.beta_theta.to_degrees()),
        }
    }

    pub fn to_sonar(&self) -> SonarConfig {
        SonarConfig {
            theta_max: self.theta_max_deg.to_radians(),
            phi_max: self.phi_max_deg.to_radians(),
            r_min: self.r_min,
            r_max: self.r_max,
            sigma_r: self.sigma_r,
            sigma_theta: self.sigma_theta_deg.to_radians(),
            beta_r: self.beta_r.unwrap_or(3.0 * self.sigma_r),
            beta_theta: self
                .beta_theta_deg
                .unwrap_or(3.0 * self.sigma_theta_deg)
                .to_radians(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaneSection {
    pub anchor_x: [f64; 2],
    pub anchor_y: [f64; 2],
    pub tilt_deg: [f64; 2],
}

impl Default for PlaneSection {
    fn default() -> Self {
        let c = ScenarioConfig::coplanar();
        Self {
            anchor_x: c.plane_anchor_box[0],
            anchor_y: c.plane_anchor_box[1],
            tilt_deg: c.plane_tilt_range.map(f64::to_degrees),
        }
    }
}

/// On-disk form of a [`ScenarioConfig`]. Every key is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub case: String,
    pub group: String,
    pub n_points: usize,
    pub outlier_ratio: f64,
    pub trials: usize,
    pub seed: u64,
    pub p_value: f64,
    pub outlier_model: String,
    pub translation_half_extent: f64,
    #[serde(rename = "box")]
    pub bbox: Aabb,
    pub sonar: SonarSection,
    pub plane: PlaneSection,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self::from_scenario(&ScenarioConfig::general())
    }
}

fn parse_case(s: &str) -> Result<Case> {
    match s.trim().to_ascii_lowercase().as_str() {
        "general" => Ok(Case::General),
        "coplanar" => Ok(Case::Coplanar),
        _ => Err(Error::config(
            "case",
            format!("unknown case {s:?} (expected general or coplanar)"),
        )),
    }
}

fn parse_outlier_model(s: &str) -> Result<OutlierModel> {
    match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
        "projected_box" => Ok(OutlierModel::ProjectedBox),
        "uniform_range_bearing" => Ok(OutlierModel::UniformRangeBearing),
        _ => Err(Error::config(
            "outlier_model",
            format!("unknown model {s:?} (expected projected_box or uniform_range_bearing)"),
        )),
    }
}

fn outlier_model_name(m: OutlierModel) -> &'static str {
    match m {
        OutlierModel::ProjectedBox => "projected_box",
        OutlierModel::UniformRangeBearing => "uniform_range_bearing",
    }
}

impl ConfigFile {
    pub fn from_scenario(c: &ScenarioConfig) -> Self {
        Self {
            case: c.case.name().to_string(),
            group: c.group.name().to_string(),
            n_points: c.n_points,
            outlier_ratio: c.outlier_ratio,
            trials: c.trials,
            seed: c.seed,
            p_value: c.p_value,
            outlier_model: outlier_model_name(c.outlier_model).to_string(),
            translation_half_extent: c.translation_half_extent,
            bbox: c.bbox,
            sonar: SonarSection::from_sonar(&c.sonar),
            plane: PlaneSection {
                anchor_x: c.plane_anchor_box[0],
                anchor_y: c.plane_anchor_box[1],
                tilt_deg: c.plane_tilt_range.map(f64::to_degrees),
            },
        }
    }

    /// Converts to radians and validates.
    pub fn to_scenario(&self) -> Result<ScenarioConfig> {
        let cfg = ScenarioConfig {
            case: parse_case(&self.case)?,
            bbox: Aabb::new(self.bbox.min, self.bbox.max)?,
            n_points: self.n_points,
            outlier_ratio: self.outlier_ratio,
            group: crate::sim::Group::parse(&self.group)?,
            trials: self.trials,
            seed: self.seed,
            sonar: self.sonar.to_sonar(),
            plane_anchor_box: [self.plane.anchor_x, self.plane.anchor_y],
            plane_tilt_range: self.plane.tilt_deg.map(f64::to_radians),
            outlier_model: parse_outlier_model(&self.outlier_model)?,
            p_value: self.p_value,
            translation_half_extent: self.translation_half_extent,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }
}

/// Parses TOML text. Missing keys take their defaults.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_scenario()
}

pub fn parse_config_file(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn config_to_toml(cfg: &ScenarioConfig) -> String {
    ConfigFile::from_scenario(cfg).to_toml()
}

/// What a run was asked to do, in enough detail to repeat it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunSpec {
    Experiment {
        grid: ExperimentGrid,
    },
    RDist {
        r: f64,
        sigma_r: f64,
        phi_max: f64,
        samples: usize,
    },
    Bench {
        case: Case,
        sizes: Vec<usize>,
        outlier_ratio: f64,
        trials: usize,
    },
    Reject {
        options: crate::pipeline::RejectOptions,
        input: String,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub wall_ms: f64,
    pub mean_test_ms: f64,
    pub mean_clique_ms: f64,
    pub mean_total_ms: f64,
}

impl TimingSummary {
    pub fn from_table(table: &ResultsTable, wall_ms: f64) -> Self {
        let n = table.rows.len().max(1) as f64;
        let sum = |f: fn(&crate::sim::TrialMetrics) -> f64| {
            table.rows.iter().map(|r| f(&r.metrics)).sum::<f64>() / n
        };
        Self {
            wall_ms,
            mean_test_ms: sum(|m| m.time_test_ms),
            mean_clique_ms: sum(|m| m.time_clique_ms),
            mean_total_ms: sum(|m| m.time_total_ms),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: RunSpec,
    pub master_seed: u64,
    pub threads: usize,
    pub code_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub timing: TimingSummary,
}

impl RunManifest {
    pub fn new(spec: RunSpec, master_seed: u64, threads: usize, timing: TimingSummary) -> Self {
        Self {
            spec,
            master_seed,
            threads,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            timing,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Where the manifest of a result file goes.
pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    s.into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::config(
                "format",
                format!("unknown format {s:?} (expected csv or json)"),
            )),
        }
    }

    /// From the file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrialLabel {
    Index(usize),
    Agg,
}

impl Serialize for TrialLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TrialLabel::Index(i) => s.serialize_u64(*i as u64),
            TrialLabel::Agg => s.serialize_str("agg"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Count {
    Exact(usize),
    Mean(f64),
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Count::Exact(n) => s.serialize_u64(*n as u64),
            Count::Mean(x) => s.serialize_f64(*x),
        }
    }
}

/// One output line. Aggregate rows hold per-cell means.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputRow {
    pub case: &'static str,
    pub group: &'static str,
    pub outlier_ratio: f64,
    pub trial: TrialLabel,
    pub tpr: f64,
    pub fpr: f64,
    pub ir: Option<f64>,
    pub n_est_inliers: Count,
    pub time_test_ms: f64,
    pub time_clique_ms: f64,
    pub time_total_ms: f64,
}

pub const CSV_COLUMNS: [&str; 11] = [
    "case",
    "group",
    "outlier_ratio",
    "trial",
    "tpr",
    "fpr",
    "ir",
    "n_est_inliers",
    "time_test_ms",
    "time_clique_ms",
    "time_total_ms",
];

/// Trial rows of each cell followed by its aggregate row.
pub fn output_rows(table: &ResultsTable) -> Vec<OutputRow> {
    let mut out = Vec::with_capacity(table.rows.len() + table.summaries.len());
    let mut rows = table.rows.iter().peekable();
    for s in &table.summaries {
        while let Some(r) =
            rows.next_if(|r| r.group == s.group && r.outlier_ratio == s.outlier_ratio)
        {
            let m = &r.metrics;
            out.push(OutputRow {
                case: r.case.name(),
                group: r.group.name(),
                outlier_ratio: r.outlier_ratio,
                trial: TrialLabel::Index(r.trial),
                tpr: m.tpr,
                fpr: m.fpr,
                ir: m.ir,
                n_est_inliers: Count::Exact(m.n_est_inliers),
                time_test_ms: m.time_test_ms,
                time_clique_ms: m.time_clique_ms,
                time_total_ms: m.time_total_ms,
            });
        }
        out.push(OutputRow {
            case: s.case.name(),
            group: s.group.name(),
            outlier_ratio: s.outlier_ratio,
            trial: TrialLabel::Agg,
            tpr: s.tpr.mean,
            fpr: s.fpr.mean,
            ir: s.ir.map(|x| x.mean),
            n_est_inliers: Count::Mean(s.n_est_inliers),
            time_test_ms: s.time_test_ms,
            time_clique_ms: s.time_clique_ms,
            time_total_ms: s.time_total_ms,
        });
    }
    out
}

pub fn write_results<W: Write>(table: &ResultsTable, format: Format, w: W) -> Result<()> {
    let rows = output_rows(table);
    match format {
        Format::Csv => {
            let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            let io = |e: csv::Error| Error::Parse(e.to_string());
            csv.write_record(CSV_COLUMNS).map_err(io)?;
            for r in &rows {
                csv.serialize(r).map_err(io)?;
            }
            csv.flush().map_err(|e| Error::Parse(e.to_string()))?;
        }
        Format::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, &rows).map_err(|e| Error::Parse(e.to_string()))?;
            writeln!(w).map_err(|e| Error::Parse(e.to_string()))?;
        }
    }
    Ok(())
}

/// Writes the table to `path`.
pub fn emit_results(table: &ResultsTable, format: Format, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_results(table, format, &mut w).map_err(|e| match e {
        Error::Parse(msg) => Error::io(path, std::io::Error::other(msg)),
        other => other,
    })?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-cell medians and quartiles, as pretty JSON.
pub fn summaries_json(table: &ResultsTable) -> String {
    serde_json::to_string_pretty(&table.summaries).expect("summaries serialize")
}

fn to_parse_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Parse(e.to_string())
}

/// Histogram bins of an r-distribution study, or the whole study as JSON.
pub fn write_rdist<W: Write>(study: &RDistStudy, format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["bin_lo", "bin_hi", "density", "gaussian_density"])
                .map_err(to_parse_err)?;
            for k in 0..study.density.len() {
                csv.serialize((
                    study.bin_edges[k],
                    study.bin_edges[k + 1],
                    study.density[k],
                    study.gaussian_density[k],
                ))
                .map_err(to_parse_err)?;
            }
            csv.flush().map_err(to_parse_err)
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, study).map_err(to_parse_err)?;
            writeln!(w).map_err(to_parse_err)
        }
    }
}

pub fn write_timing<W: Write>(rows: &[TimingRow], format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record([
                "case",
                "n",
                "trials",
                "mean_test_ms",
                "mean_clique_ms",
                "mean_total_ms",
            ])
            .map_err(to_parse_err)?;
            for r in rows {
                csv.serialize((
                    r.case.name(),
                    r.n,
                    r.trials,
                    r.mean_test_ms,
                    r.mean_clique_ms,
                    r.mean_total_ms,
                ))
                .map_err(to_parse_err)?;
            }
            csv.flush().map_err(to_parse_err)
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows).map_err(to_parse_err)?;
            writeln!(w).map_err(to_parse_err)
        }
    }
}

/// Reads `id wx wy wz r theta` records (theta in radians). Fields are
/// separated by whitespace and/or commas; blank lines and lines starting
/// with `#` are skipped.
pub fn parse_correspondences(text: &str) -> Result<Vec<Correspondence>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let lineno = k + 1;
        if fields.len() != 6 {
            return Err(Error::Parse(format!(
                "line {lineno}: expected 6 fields, got {}",
                fields.len()
            )));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("line {lineno}: bad id {:?}", fields[0])))?;
        let mut v = [0.0; 5];
        for (slot, f) in v.iter_mut().zip(&fields[1..]) {
            *slot = f
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| Error::Parse(format!("line {lineno}: bad number {f:?}")))?;
        }
        let meas = Measurement::new(v[3], v[4])
            .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))?;
        out.push(Correspondence {
            id,
            world: WorldPoint::new(v[0], v[1], v[2]),
            meas,
        });
    }
    Ok(out)
}

pub fn read_correspondences(path: &Path) -> Result<Vec<Correspondence>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_correspondences(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn format_correspondences(corrs: &[Correspondence]) -> String {
    let mut s = String::from("# id wx wy wz r theta\n");
    for c in corrs {
        s.push_str(&format!(
            "{} {:e} {:e} {:e} {:e} {:e}\n",
            c.id, c.world.x, c.world.y, c.world.z, c.meas.r, c.meas.theta
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_experiment, Group};

    #[test]
    fn minimal_config_is_standard_general() {
        let cfg = parse_config_str("").unwrap();
        assert_eq!(cfg.case, Case::General);
        assert_eq!(cfg.group, Group::Standard);
        assert!((cfg.sonar.phi_max - 7f64.to_radians()).abs() < 1e-15);
        assert!((cfg.sonar.sigma_r - 0.005).abs() < 1e-15);
        assert!((cfg.sonar.sigma_theta - 0.5f64.to_radians()).abs() < 1e-15);
        assert!((cfg.sonar.beta_r - 0.015).abs() < 1e-15);
        assert_eq!(cfg.bbox, Aabb::reference());
    }

    #[test]
    fn invalid_fields_are_named() {
        let field = |text: &str| match parse_config_str(text) {
            Err(Error::InvalidConfig { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        };
        assert_eq!(
            field("case = \"coplanar\"\ngroup = \"half_scale\""),
            "group"
        );
        assert_eq!(field("group = \"bogus\""), "group");
        assert_eq!(field("outlier_ratio = 1.0"), "outlier_ratio");
        assert_eq!(field("[sonar]\ntheta_max_deg = 65\nphi_max_deg = 7\nr_min = 0.5\nr_max = 5\nsigma_r = -0.1\nsigma_theta_deg = 0.5\nbeta_r = 0.01"), "sigma_r");
        assert!(matches!(
            parse_config_str("bogus_key = 1"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn beta_defaults_follow_sigma() {
        let cfg = parse_config_str(
            "[sonar]\ntheta_max_deg = 65\nphi_max_deg = 7\nr_min = 0.5\nr_max = 5\nsigma_r = 0.01\nsigma_theta_deg = 1",
        )
        .unwrap();
        assert!((cfg.sonar.beta_r - 0.03).abs() < 1e-15);
        assert!((cfg.sonar.beta_theta - 3f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn config_round_trip() {
        let text = "case = \"coplanar\"\ngroup = \"no_approx\"\nseed = 17\noutlier_ratio = 0.9\n";
        let a = parse_config_str(text).unwrap();
        let file_a = ConfigFile::from_scenario(&a);
        let b = parse_config_str(&file_a.to_toml()).unwrap();
        let file_b = ConfigFile::from_scenario(&b);
        assert_eq!(file_a, file_b);
        assert_eq!(a.case, b.case);
        assert_eq!(a.group, b.group);
        assert_eq!(a.seed, 17);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-15 * x.abs().max(1.0);
        assert!(close(a.sonar.phi_max, b.sonar.phi_max));
        assert!(close(a.plane_tilt_range[1], b.plane_tilt_range[1]));
        let c = parse_config_str(&config_to_toml(&b)).unwrap();
        assert_eq!(b, c);
    }

    fn small_table() -> ResultsTable {
        let mut base = ScenarioConfig::general();
        base.trials = 2;
        base.seed = 3;
        base.n_points = 30;
        run_experiment(
            &ExperimentGrid {
                base,
                groups: vec![Group::Standard],
                ratios: vec![0.5],
            },
            1,
        )
        .unwrap()
    }

    #[test]
    fn csv_shape_and_missing_ir() {
        let mut table = small_table();
        table.rows[1].metrics.ir = None;
        let mut buf = Vec::new();
        write_results(&table, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("general,standard,0.5,agg,"));
        let cols: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(cols[6], "");
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        write_results(&ResultsTable::default(), Format::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{}\n", CSV_COLUMNS.join(","))
        );
    }

    #[test]
    fn json_mirrors_csv() {
        let mut table = small_table();
        table.rows[0].metrics.ir = None;
        let mut buf = Vec::new();
        write_results(&table, Format::Json, &mut buf).unwrap();
        let json: Vec<serde_json::Value> = serde_json::from_slice(&buf).unwrap();
        let mut buf = Vec::new();
        write_results(&table, Format::Csv, &mut buf).unwrap();
        let mut rdr = csv::Reader::from_reader(buf.as_slice());
        let recs: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(json.len(), recs.len());
        assert!(json[0]["ir"].is_null());
        assert_eq!(json[2]["trial"], "agg");
        for (j, rec) in json.iter().zip(&recs) {
            for (k, col) in CSV_COLUMNS.iter().enumerate() {
                let v = &j[*col];
                let field = &rec[k];
                match v {
                    serde_json::Value::Null => assert_eq!(field, ""),
                    serde_json::Value::String(s) => assert_eq!(field, s),
                    serde_json::Value::Number(n) => {
                        assert_eq!(
                            field.parse::<f64>().unwrap(),
                            n.as_f64().unwrap(),
                            "column {col}"
                        )
                    }
                    other => panic!("unexpected {other}"),
                }
            }
        }
    }

    #[test]
    fn manifest_round_trip() {
        let grid = ExperimentGrid {
            base: ScenarioConfig::coplanar(),
            groups: vec![Group::Standard, Group::NoApprox],
            ratios: vec![0.1, 0.8],
        };
        let m = RunManifest::new(
            RunSpec::Experiment { grid },
            99,
            4,
            TimingSummary {
                wall_ms: 1.0 / 3.0,
                ..Default::default()
            },
        );
        assert_eq!(RunManifest::from_json(&m.to_json()).unwrap(), m);
        let m = RunManifest::new(
            RunSpec::RDist {
                r: 2.2,
                sigma_r: 0.005,
                phi_max: 7f64.to_radians(),
                samples: 100_000,
            },
            1,
            1,
            TimingSummary::default(),
        );
        assert_eq!(RunManifest::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn correspondence_file_round_trip() {
        let text = "# header\n0 1.0 2.0 3.0 2.5 0.1\n\n7, -1e-3, 0, 4, 1.25, -0.3\n";
        let corrs = parse_correspondences(text).unwrap();
        assert_eq!(corrs.len(), 2);
        assert_eq!(corrs[1].id, 7);
        assert_eq!(corrs[1].meas.theta, -0.3);
        assert_eq!(
            parse_correspondences(&format_correspondences(&corrs)).unwrap(),
            corrs
        );
    }

    #[test]
    fn correspondence_errors_name_line() {
        let e = parse_correspondences("0 1 2 3 4\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 1"), "{e}");
        let e = parse_correspondences("# c\n0 1 2 3 -4 0\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn io_errors_carry_path() {
        let e = read_correspondences(Path::new("/nonexistent/corrs.txt"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("/nonexistent/corrs.txt"), "{e}");
    }
}
