//! File formats: TOML experiment configs, `# triphot v1` CSV tables and their
//! JSON equivalents.
//!
//! # Config document
//!
//! ```toml
//! [source]
//! phase = "pi"          # radians; numbers or expressions like "3pi/8"
//! t20 = 1.0             # two-photon amplitude factor of |2,0>, default 1
//! t02 = 1.0             # two-photon amplitude factor of |0,2>, default 1
//! jitter = 0.0          # Gaussian phase jitter sigma, radians, default 0
//! pair_rate = 300.0     # pairs per second, default 300
//!
//! [plate]
//! kind = "hwp"          # "hwp" | "qwp"; or give `retardance` instead
//! angle = "pi/8"        # axis angle from x, radians
//!
//! [detection]           # optional
//! analysis = "none"     # "none" | "x" | "y"
//! eta1 = 1.0
//! eta2 = 1.0
//! accidental_rate = 0.1 # counts per second
//! ```
//!
//! # CSV tables
//!
//! The first line is `# triphot v1`. Further `#` lines carry metadata as
//! `# key: <json>`. Then a header row, `param,value,rate` for sweeps or
//! `t_start,coincidences` for count records.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::experiment::{Analysis, CountRecord, ExperimentConfig, SourceSpec, SweepParam, SweepTable};
use crate::optics::PlateSpec;
use crate::state::{BiphotonState, TritLabel};
use crate::{Error, Result};

pub const CSV_MAGIC: &str = "# triphot v1";

/// Parses an angle in radians: a plain number or an expression built from
/// `pi` such as `pi/8`, `-3pi/4`, `2*pi`, `0.5pi`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t: String = s
        .trim()
        .to_ascii_lowercase()
        .replace('π', "pi")
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    let bad = || Error::Parse(format!("cannot parse angle `{s}`"));
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let Some(pos) = t.find("pi") else {
        return num(&t);
    };
    let (pre, post) = (&t[..pos], &t[pos + 2..]);
    let pre = pre.strip_suffix('*').unwrap_or(pre);
    let coef = match pre {
        "" | "+" => 1.0,
        "-" => -1.0,
        p => num(p)?,
    };
    let tail = if post.is_empty() {
        1.0
    } else if let Some(d) = post.strip_prefix('/') {
        1.0 / num(d)?
    } else if let Some(m) = post.strip_prefix('*') {
        num(m)?
    } else {
        return Err(bad());
    };
    let v = coef * PI * tail;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Parses a complex number such as `1`, `-0.5i`, `i`, `0.3-0.2i`, `1e-3+2i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot parse complex number `{s}`"));
    if t.is_empty() {
        return Err(bad());
    }
    let imag_part = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            v => v.parse().map_err(|_| bad()),
        }
    };
    if let Some(body) = t.strip_suffix(['i', 'j']) {
        // Split at the last sign that is not the leading sign or an exponent sign.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|_| bad())?;
                Ok(Complex64::new(re, imag_part(&body[k..])?))
            }
            None => Ok(Complex64::new(0.0, imag_part(body)?)),
        }
    } else {
        Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0))
    }
}

/// Parses a state: a trit label (`psi_plus`, `minus`, ...), a Fock label
/// `Nx,Ny` with `Nx + Ny = 2`, or three comma-separated complex amplitudes
/// (normalized on the way in).
pub fn parse_state(s: &str) -> Result<BiphotonState> {
    if let Ok(t) = s.parse::<TritLabel>() {
        if !s.trim().chars().all(|c| c.is_ascii_digit()) {
            return Ok(BiphotonState::trit(t));
        }
    }
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.len() {
        2 => {
            let nx: usize = parts[0].parse().map_err(|_| Error::Parse(format!("bad Fock label `{s}`")))?;
            let ny: usize = parts[1].parse().map_err(|_| Error::Parse(format!("bad Fock label `{s}`")))?;
            if nx + ny != 2 {
                return Err(Error::Parse(format!("Fock label `{s}` must have Nx + Ny = 2")));
            }
            BiphotonState::fock(2 - nx)
        }
        3 => {
            let c: Vec<Complex64> = parts.iter().map(|p| parse_complex(p)).collect::<Result<_>>()?;
            BiphotonState::new(c[0], c[1], c[2])
        }
        _ => Err(Error::Parse(format!(
            "state `{s}` is neither a trit label, an `Nx,Ny` label nor three amplitudes"
        ))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum AngleField {
    Number(f64),
    Expr(String),
}

impl AngleField {
    fn value(&self, field: &str) -> Result<f64> {
        match self {
            AngleField::Number(v) => Ok(*v),
            AngleField::Expr(s) => parse_angle(s).map_err(|_| Error::InvalidConfig {
                field: field.into(),
                reason: format!("cannot parse angle `{s}`"),
            }),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_pair_rate() -> f64 {
    300.0
}
fn default_accidentals() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceDoc {
    phase: AngleField,
    #[serde(default = "one")]
    t20: f64,
    #[serde(default = "one")]
    t02: f64,
    #[serde(default)]
    jitter: f64,
    #[serde(default = "default_pair_rate")]
    pair_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlateDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    retardance: Option<AngleField>,
    angle: AngleField,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionDoc {
    #[serde(default)]
    analysis: Analysis,
    #[serde(default = "one")]
    eta1: f64,
    #[serde(default = "one")]
    eta2: f64,
    #[serde(default = "default_accidentals")]
    accidental_rate: f64,
}

impl Default for DetectionDoc {
    fn default() -> Self {
        Self {
            analysis: Analysis::None,
            eta1: 1.0,
            eta2: 1.0,
            accidental_rate: default_accidentals(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    source: SourceDoc,
    plate: PlateDoc,
    #[serde(default)]
    detection: DetectionDoc,
}

/// Parses and validates a TOML experiment config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let retardance = match (&doc.plate.kind, &doc.plate.retardance) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidConfig {
                field: "plate".into(),
                reason: "give either `kind` or `retardance`, not both".into(),
            })
        }
        (Some(k), None) => match k.to_ascii_lowercase().as_str() {
            "hwp" | "half" | "half_wave" => PI,
            "qwp" | "quarter" | "quarter_wave" => FRAC_PI_2,
            other => {
                return Err(Error::InvalidConfig {
                    field: "plate.kind".into(),
                    reason: format!("unknown plate kind `{other}` (expected hwp or qwp)"),
                })
            }
        },
        (None, Some(r)) => r.value("plate.retardance")?,
        (None, None) => {
            return Err(Error::InvalidConfig {
                field: "plate".into(),
                reason: "missing `kind` or `retardance`".into(),
            })
        }
    };
    let cfg = ExperimentConfig {
        source: SourceSpec {
            phase: doc.source.phase.value("source.phase")?,
            t20: doc.source.t20,
            t02: doc.source.t02,
            jitter: doc.source.jitter,
            pair_rate: doc.source.pair_rate,
        },
        plate: PlateSpec::new(retardance, doc.plate.angle.value("plate.angle")?),
        analysis: doc.detection.analysis,
        eta1: doc.detection.eta1,
        eta2: doc.detection.eta2,
        accidental_rate: doc.detection.accidental_rate,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Fully resolved config as a TOML document (numeric radians).
pub fn config_to_toml(cfg: &ExperimentConfig) -> String {
    let doc = ConfigDoc {
        source: SourceDoc {
            phase: AngleField::Number(cfg.source.phase),
            t20: cfg.source.t20,
            t02: cfg.source.t02,
            jitter: cfg.source.jitter,
            pair_rate: cfg.source.pair_rate,
        },
        plate: PlateDoc {
            kind: None,
            retardance: Some(AngleField::Number(cfg.plate.retardance)),
            angle: AngleField::Number(cfg.plate.angle),
        },
        detection: DetectionDoc {
            analysis: cfg.analysis,
            eta1: cfg.eta1,
            eta2: cfg.eta2,
            accidental_rate: cfg.accidental_rate,
        },
    };
    toml::to_string(&doc).expect("config document serializes")
}

/// Writes `bytes` to a temporary file beside `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| Error::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Body rows with their 1-based line numbers within the body, after checking
/// the header row.
fn read_rows(body: &str, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let got = r.headers().map_err(csv_err)?.clone();
    if got.iter().map(str::trim).ne(header.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected columns `{}`, found `{}`",
            header.join(","),
            got.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != header.len() {
                return Err(Error::Parse(format!("line {line}: expected {} fields", header.len())));
            }
            Ok((line, rec))
        })
        .collect()
}

fn parse_field<T: std::str::FromStr>(s: &str, line: u64) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse `{s}`")))
}

/// Run parameters of a Monte Carlo table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McMeta {
    pub seed: u64,
    pub duration: f64,
    pub bin: f64,
}

/// A Monte Carlo run as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub config: ExperimentConfig,
    pub meta: McMeta,
    pub records: Vec<CountRecord>,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

fn meta_line(key: &str, value: &impl Serialize) -> String {
    format!("# {key}: {}\n", serde_json::to_string(value).expect("metadata serializes"))
}

fn finish_csv<W: Write>(w: csv::Writer<W>) -> Result<W> {
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn sweep_to_csv(t: &SweepTable) -> Result<String> {
    let mut head = format!("{CSV_MAGIC}\n");
    head.push_str(&meta_line("config", &t.config));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(head.into_bytes());
    w.write_record(["param", "value", "rate"]).map_err(csv_err)?;
    for &(value, rate) in &t.points {
        w.write_record([t.parameter.name().to_string(), value.to_string(), rate.to_string()])
            .map_err(csv_err)?;
    }
    Ok(String::from_utf8(finish_csv(w)?).expect("utf-8 csv"))
}

pub fn counts_to_csv(t: &CountTable) -> Result<String> {
    let mut head = format!("{CSV_MAGIC}\n");
    head.push_str(&meta_line("config", &t.config));
    head.push_str(&meta_line("mc", &t.meta));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(head.into_bytes());
    w.write_record(["t_start", "coincidences"]).map_err(csv_err)?;
    for r in &t.records {
        w.write_record([r.t_start.to_string(), r.coincidences.to_string()])
            .map_err(csv_err)?;
    }
    Ok(String::from_utf8(finish_csv(w)?).expect("utf-8 csv"))
}

/// Splits the magic line and `# key: json` metadata from the CSV body.
fn split_header(text: &str) -> Result<(Vec<(String, String)>, String)> {
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim_end() == CSV_MAGIC => {}
        _ => return Err(Error::Parse(format!("missing `{CSV_MAGIC}` header line"))),
    }
    let mut meta = Vec::new();
    let mut body = String::new();
    for line in lines {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once(':') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    Ok((meta, body))
}

fn meta_value<T: for<'de> Deserialize<'de>>(meta: &[(String, String)], key: &str) -> Result<T> {
    let raw = meta
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::Parse(format!("missing `# {key}:` metadata line")))?;
    serde_json::from_str(raw).map_err(|e| Error::Parse(format!("metadata `{key}`: {e}")))
}

pub fn sweep_from_csv(text: &str) -> Result<SweepTable> {
    let (meta, body) = split_header(text)?;
    let config: ExperimentConfig = meta_value(&meta, "config")?;
    let rows = read_rows(&body, &["param", "value", "rate"])?;
    let mut parameter = None;
    let mut points = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let p: SweepParam = row[0].parse()?;
        if *parameter.get_or_insert(p) != p {
            return Err(Error::Parse(format!("line {line}: mixed sweep parameters in one table")));
        }
        points.push((parse_field(&row[1], line)?, parse_field(&row[2], line)?));
    }
    Ok(SweepTable {
        parameter: parameter.ok_or(Error::DegenerateTable("sweep CSV has no rows"))?,
        points,
        config,
    })
}

pub fn counts_from_csv(text: &str) -> Result<CountTable> {
    let (meta, body) = split_header(text)?;
    let config = meta_value(&meta, "config")?;
    let mc = meta_value(&meta, "mc")?;
    let records = read_rows(&body, &["t_start", "coincidences"])?
        .into_iter()
        .map(|(line, row)| {
            Ok(CountRecord {
                t_start: parse_field(&row[0], line)?,
                coincidences: parse_field(&row[1], line)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CountTable {
        config,
        meta: mc,
        records,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

pub fn sweep_from_json(text: &str) -> Result<SweepTable> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("json: {e}")))
}

pub fn counts_from_json(text: &str) -> Result<CountTable> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("json: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{simulate_counts, sweep};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_8;

    #[test]
    fn angle_expressions() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("pi/8").unwrap(), FRAC_PI_8);
        assert_eq!(parse_angle("-3pi/4").unwrap(), -3.0 * PI / 4.0);
        assert_eq!(parse_angle("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("0.5 π").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("pi/x").is_err());
        assert!(parse_angle("").is_err());
    }

    #[test]
    fn complex_numbers() {
        assert_eq!(parse_complex("1").unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("0.3-0.2i").unwrap(), Complex64::new(0.3, -0.2));
        assert_eq!(parse_complex("1e-3+2i").unwrap(), Complex64::new(1e-3, 2.0));
        assert_eq!(parse_complex("-2.5e-1j").unwrap(), Complex64::new(0.0, -0.25));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn state_specs() {
        assert_eq!(parse_state("psi_plus").unwrap(), BiphotonState::trit(TritLabel::Plus));
        assert_eq!(parse_state("2,0").unwrap(), BiphotonState::fock(0).unwrap());
        assert_eq!(parse_state("0,2").unwrap(), BiphotonState::fock(2).unwrap());
        let s = parse_state("1,0,1").unwrap();
        assert!(s.eq_up_to_phase(&BiphotonState::trit(TritLabel::Plus), 1e-15));
        assert!(parse_state("3,0").is_err());
        assert!(parse_state("0,0,0").is_err());
    }

    const PHASE_SWEEP: &str = r#"
[source]
phase = 0.0
pair_rate = 300.0

[plate]
kind = "hwp"
angle = "pi/8"
"#;

    #[test]
    fn config_defaults_and_expressions() {
        let c = parse_config(PHASE_SWEEP).unwrap();
        assert_eq!(c.plate, PlateSpec::half_wave(FRAC_PI_8));
        assert_eq!(c.eta1, 1.0);
        assert_eq!(c.accidental_rate, 0.1);
        assert_eq!(c.analysis, Analysis::None);
        let back = parse_config(&config_to_toml(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn config_errors_name_the_problem() {
        let e = parse_config("[source]\nphase = 0\n[plate]\nkind = \"hwp\"\nangle = 0\nbogus = 1\n").unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.contains("bogus")), "{e}");
        let e = parse_config("[source]\nphase = 0\n[plate]\nkind = \"xwp\"\nangle = 0\n").unwrap_err();
        assert!(matches!(&e, Error::InvalidConfig { field, .. } if field == "plate.kind"));
        let e = parse_config("[source]\nphase = 0\neta = 2\n[plate]\nkind = \"hwp\"\nangle = 0\n").unwrap_err();
        assert!(e.to_string().contains("line"), "{e}");
        let e = parse_config(
            "[source]\nphase = 0\n[plate]\nkind = \"hwp\"\nangle = 0\n[detection]\neta1 = 3\n",
        )
        .unwrap_err();
        assert!(matches!(&e, Error::InvalidConfig { field, .. } if field == "detection.eta1"));
    }

    #[test]
    fn csv_rejects_missing_magic() {
        assert!(sweep_from_csv("param,value,rate\nphi,0,0\n").is_err());
    }

    #[test]
    fn counts_round_trip() {
        let cfg = parse_config(PHASE_SWEEP).unwrap();
        let records = simulate_counts(&cfg, 9, 10.0, 0.7).unwrap();
        let t = CountTable {
            config: cfg,
            meta: McMeta { seed: 9, duration: 10.0, bin: 0.7 },
            records,
        };
        let csv = counts_to_csv(&t).unwrap();
        assert!(csv.starts_with("# triphot v1\n"));
        assert!(csv.contains("\nt_start,coincidences\n"));
        assert_eq!(counts_from_csv(&csv).unwrap(), t);
        assert_eq!(counts_from_json(&to_json(&t)).unwrap(), t);
    }

    proptest! {
        #[test]
        fn sweep_csv_round_trip_is_lossless(phase in -7.0..7.0f64, t02 in 0.0..1.0f64, steps in 2usize..40) {
            let mut cfg = parse_config(PHASE_SWEEP).unwrap();
            cfg.source.phase = phase;
            cfg.source.t02 = t02;
            let t = sweep(&cfg, SweepParam::Chi, 0.0, PI, steps).unwrap();
            let csv = sweep_to_csv(&t).unwrap();
            prop_assert!(csv.starts_with("# triphot v1\n"));
            prop_assert!(csv.contains("\nparam,value,rate\n"));
            prop_assert_eq!(&sweep_from_csv(&csv).unwrap(), &t);
            prop_assert_eq!(&sweep_from_json(&to_json(&t)).unwrap(), &t);
        }
    }
}
