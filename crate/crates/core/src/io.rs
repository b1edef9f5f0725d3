//! Dataset CSV ingestion/export and the versioned model file.
//!
//! Dataset CSV: header `id,f_1,...,f_d,label,time_days`; labels are `-1` or
//! `1`; `time_days` is a non-negative decimal or `NA`.
//!
//! Model file: one `key value...` line per field, opened by
//! `schema jointsel-model-v1` and closed by `end`. Floats are written in the
//! shortest decimal form that parses back to the identical bits.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::dataset::{Dataset, Hyperparams, ModelState, Standardizer};
use crate::error::{Error, Result};

pub const MODEL_SCHEMA: &str = "jointsel-model-v1";
const NA: &str = "NA";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn default_feature_names(d: usize) -> impl Iterator<Item = String> {
    (1..=d).map(|i| format!("f_{i}"))
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_csv(&text, path)
}

/// Parses dataset CSV text; `origin` is only used in error messages.
pub fn parse_csv(text: &str, origin: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| parse_err(origin, 1, e.to_string()))?
        .clone();
    let cols = header.len();
    if cols < 4 || &header[0] != "id" || &header[cols - 2] != "label" || &header[cols - 1] != "time_days" {
        return Err(parse_err(
            origin,
            1,
            "header must be id,<features...>,label,time_days with at least one feature",
        ));
    }
    let d = cols - 3;
    let names: Vec<String> = header.iter().skip(1).take(d).map(str::to_string).collect();

    let mut ids = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut labels = Vec::new();
    let mut times = Vec::new();
    let mut present = Vec::new();
    let mut lines = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(origin, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != cols {
            return Err(parse_err(
                origin,
                line,
                format!("expected {cols} fields, found {}", rec.len()),
            ));
        }
        ids.push(rec[0].to_string());
        for (i, field) in rec.iter().enumerate().skip(1).take(d) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(origin, line, format!("column {}: invalid number {field:?}", i + 1)))?;
            values.push(v);
        }
        let label_field = rec[cols - 2].trim();
        let label: i64 = label_field
            .parse()
            .map_err(|_| parse_err(origin, line, format!("invalid label {label_field:?}")))?;
        if label != -1 && label != 1 {
            return Err(parse_err(origin, line, format!("invalid label {label} (expected -1 or 1)")));
        }
        labels.push(label as i8);
        let t = rec[cols - 1].trim();
        if t == NA {
            times.push(0.0);
            present.push(false);
        } else {
            let v: f64 = t
                .parse()
                .map_err(|_| parse_err(origin, line, format!("invalid time {t:?}")))?;
            if !(v >= 0.0) {
                return Err(parse_err(origin, line, format!("time must be non-negative, got {t}")));
            }
            times.push(v);
            present.push(true);
        }
        lines.push(line);
    }
    let n = labels.len();
    let features = DMatrix::from_vec(d, n, values);
    let feature_names = (!names.iter().cloned().eq(default_feature_names(d))).then_some(names);
    let sample_ids = (!ids.iter().cloned().eq((1..=n).map(|j| j.to_string()))).then_some(ids);
    let ds = Dataset {
        features,
        labels,
        times,
        time_present: present,
        feature_names,
        sample_ids,
    };
    ds.validate().map_err(|e| match e {
        Error::InvalidLabel { index, value } => {
            parse_err(origin, lines[index], format!("invalid label {value}"))
        }
        Error::NonFinite { what: "features", index } => {
            parse_err(origin, lines[index / d], "non-finite feature value")
        }
        Error::NonFinite { what: "times", index } => {
            parse_err(origin, lines[index], "non-finite time")
        }
        other => other,
    })
}

pub fn write_csv_to<W: Write>(ds: &Dataset, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = ds.n_features();
    let mut header = vec!["id".to_string()];
    header.extend((0..d).map(|i| ds.feature_name(i)));
    header.push("label".into());
    header.push("time_days".into());
    w.write_record(&header)?;
    for j in 0..ds.n_samples() {
        let mut row = Vec::with_capacity(d + 3);
        row.push(ds.sample_id(j));
        row.extend(ds.features.column(j).iter().map(|v| v.to_string()));
        row.push(ds.labels[j].to_string());
        row.push(if ds.time_present[j] {
            ds.times[j].to_string()
        } else {
            NA.to_string()
        });
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(io_err(path))?;
    write_csv_to(ds, std::io::BufWriter::new(file)).map_err(io_err(path))
}

fn join<T: Display>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn model_to_string(m: &ModelState) -> String {
    let hp = &m.hyperparams;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        s.push_str(k);
        if !v.is_empty() {
            s.push(' ');
            s.push_str(&v);
        }
        s.push('\n');
    };
    kv("schema", MODEL_SCHEMA.into());
    kv("n_inputs", m.n_inputs().to_string());
    kv("dim", m.w.len().to_string());
    kv("n_samples", m.alpha.len().to_string());
    kv("lambda", hp.lambda.to_string());
    kv("k", hp.k.to_string());
    kv("max_outer_iters", hp.max_outer_iters.to_string());
    kv("max_newton_iters", hp.max_newton_iters.to_string());
    kv("outer_tol", hp.outer_tol.to_string());
    kv("eps_row_norm", hp.eps_row_norm.to_string());
    kv("gamma_max", hp.gamma_max.to_string());
    kv("standardize", hp.standardize.to_string());
    kv("sample_selection_enabled", hp.sample_selection_enabled.to_string());
    kv("fit_intercept", hp.fit_intercept.to_string());
    kv("random_init_d", hp.random_init_d.to_string());
    kv("seed", hp.seed.to_string());
    kv("gamma", m.gamma.to_string());
    kv("w", join(m.w.iter()));
    kv("v", join(m.v.iter()));
    kv("d_diag", join(m.d_diag.iter()));
    kv("alpha", join(&m.alpha));
    kv("beta", join(&m.beta));
    kv("objective_trace", join(&m.objective_trace));
    kv("mean", join(&m.standardizer.mean));
    kv("scale", join(&m.standardizer.scale));
    kv("feature_names", m.feature_names.join("\t"));
    kv("end", String::new());
    s
}

pub fn save_model(m: &ModelState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(bad) = m.feature_names.iter().find(|n| n.contains(['\t', '\n', '\r'])) {
        return Err(Error::InvalidConfig(format!(
            "feature name {bad:?} contains a tab or line break"
        )));
    }
    fs::write(path, model_to_string(m)).map_err(io_err(path))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelState> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_model(&text, path)
}

struct Fields<'a> {
    map: HashMap<&'a str, (usize, &'a str)>,
    path: &'a Path,
    last_line: usize,
}

impl<'a> Fields<'a> {
    fn raw(&self, key: &str) -> Result<(usize, &'a str)> {
        self.map
            .get(key)
            .copied()
            .ok_or_else(|| parse_err(self.path, self.last_line, format!("missing field {key:?}")))
    }

    fn scalar<T: FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.raw(key)?;
        v.parse()
            .map_err(|_| parse_err(self.path, line, format!("invalid value for {key}: {v:?}")))
    }

    fn floats(&self, key: &str, len: usize) -> Result<Vec<f64>> {
        let (line, v) = self.raw(key)?;
        let xs = v
            .split_ascii_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| parse_err(self.path, line, format!("invalid number in {key}")))?;
        if len != usize::MAX && xs.len() != len {
            return Err(parse_err(
                self.path,
                line,
                format!("{key}: expected {len} values, found {}", xs.len()),
            ));
        }
        Ok(xs)
    }
}

/// Parses model text; `origin` is only used in error messages.
pub fn parse_model(text: &str, origin: &Path) -> Result<ModelState> {
    let mut lines = text.lines().enumerate();
    let first = lines.next().map(|(_, l)| l).unwrap_or("");
    let Some(found) = first.strip_prefix("schema ") else {
        return Err(parse_err(origin, 1, "missing schema line"));
    };
    if found != MODEL_SCHEMA {
        return Err(Error::VersionMismatch {
            expected: MODEL_SCHEMA,
            found: found.to_string(),
        });
    }
    let mut map = HashMap::new();
    let mut ended = false;
    let mut last_line = 1;
    for (i, line) in lines {
        last_line = i + 1;
        if line == "end" {
            ended = true;
            break;
        }
        let (key, value) = line.split_once(' ').unwrap_or((line, ""));
        if map.insert(key, (i + 1, value)).is_some() {
            return Err(parse_err(origin, i + 1, format!("duplicate field {key:?}")));
        }
    }
    if !ended {
        return Err(parse_err(origin, last_line, "truncated model file (no end marker)"));
    }
    let f = Fields {
        map,
        path: origin,
        last_line,
    };
    let n_inputs: usize = f.scalar("n_inputs")?;
    let dim: usize = f.scalar("dim")?;
    let n: usize = f.scalar("n_samples")?;
    let hyperparams = Hyperparams {
        lambda: f.scalar("lambda")?,
        k: f.scalar("k")?,
        max_outer_iters: f.scalar("max_outer_iters")?,
        max_newton_iters: f.scalar("max_newton_iters")?,
        outer_tol: f.scalar("outer_tol")?,
        eps_row_norm: f.scalar("eps_row_norm")?,
        gamma_max: f.scalar("gamma_max")?,
        standardize: f.scalar("standardize")?,
        sample_selection_enabled: f.scalar("sample_selection_enabled")?,
        fit_intercept: f.scalar("fit_intercept")?,
        random_init_d: f.scalar("random_init_d")?,
        seed: f.scalar("seed")?,
    };
    if dim != n_inputs + usize::from(hyperparams.fit_intercept) {
        let (line, _) = f.raw("dim")?;
        return Err(parse_err(origin, line, "dim inconsistent with n_inputs and fit_intercept"));
    }
    let (names_line, names) = f.raw("feature_names")?;
    let feature_names: Vec<String> = if names.is_empty() && dim == 0 {
        Vec::new()
    } else {
        names.split('\t').map(str::to_string).collect()
    };
    if feature_names.len() != dim {
        return Err(parse_err(origin, names_line, "feature_names length mismatch"));
    }
    Ok(ModelState {
        w: DVector::from_vec(f.floats("w", dim)?),
        v: DVector::from_vec(f.floats("v", dim)?),
        d_diag: DVector::from_vec(f.floats("d_diag", dim)?),
        alpha: f.floats("alpha", n)?,
        beta: f.floats("beta", n)?,
        gamma: f.scalar("gamma")?,
        objective_trace: f.floats("objective_trace", usize::MAX)?,
        standardizer: Standardizer {
            mean: f.floats("mean", n_inputs)?,
            scale: f.floats("scale", n_inputs)?,
        },
        feature_names,
        hyperparams,
    })
}
