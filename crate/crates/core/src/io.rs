//! Text formats for datasets and score/prediction matrices.
//!
//! Dense dataset format (the canonical interchange format): a header line
//! `m d l`, then `m` lines each holding `d` real features followed by `l`
//! binary labels, whitespace-separated. Matrix files use a `m l` header
//! followed by `m` rows. Sparse dataset lines follow the common benchmark
//! layout `lab,lab,... idx:val idx:val ...` with 1-based indices. All
//! formats are UTF-8 with LF or CRLF endings and dot decimal separators.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::data::{Dataset, FeatureMatrix, LabelMatrix};
use crate::error::{Error, Result};

fn load_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Load {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_usize(tok: &str, path: &Path, line: usize, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| load_err(path, line, format!("invalid {what} `{tok}`")))
}

fn parse_finite(tok: &str, path: &Path, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| load_err(path, line, format!("invalid numeric value `{tok}`")))?;
    if !v.is_finite() {
        return Err(load_err(path, line, format!("non-finite value `{tok}`")));
    }
    Ok(v)
}

fn parse_bit(tok: &str, path: &Path, line: usize) -> Result<u8> {
    match tok {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(load_err(path, line, format!("label must be 0 or 1, got `{tok}`"))),
    }
}

/// Loads the dense dataset format. Errors cite the offending 1-based line.
pub fn load_dense(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| load_err(path, 1, "empty file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 3 {
        return Err(load_err(path, 1, "header must be `m d l`"));
    }
    let m = parse_usize(head[0], path, 1, "instance count")?;
    let d = parse_usize(head[1], path, 1, "feature dimension")?;
    let l = parse_usize(head[2], path, 1, "label count")?;

    let mut feats = Array2::zeros((m, d));
    let mut labels = Array2::zeros((m, l));
    let mut row = 0usize;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if row == m {
            return Err(load_err(path, lineno, format!("expected {m} data rows, found more")));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != d + l {
            return Err(load_err(
                path,
                lineno,
                format!("expected {} fields ({d} features + {l} labels), found {}", d + l, toks.len()),
            ));
        }
        for (j, tok) in toks[..d].iter().enumerate() {
            feats[(row, j)] = parse_finite(tok, path, lineno)?;
        }
        for (j, tok) in toks[d..].iter().enumerate() {
            labels[(row, j)] = parse_bit(tok, path, lineno)?;
        }
        row += 1;
    }
    if row != m {
        return Err(load_err(path, row + 1, format!("expected {m} data rows, found {row}")));
    }
    Dataset::new(FeatureMatrix::new(feats)?, LabelMatrix::new(labels)?)
}

/// Writes the dense dataset format. Features print with shortest
/// round-trip precision, so `load_dense(write_dense(ds)) == ds`.
pub fn write_dense(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    let (m, d, l) = (
        data.instances(),
        data.features().dim(),
        data.labels().labels(),
    );
    out.push_str(&format!("{m} {d} {l}\n"));
    for i in 0..m {
        let mut fields: Vec<String> = Vec::with_capacity(d + l);
        for j in 0..d {
            fields.push(format!("{}", data.features().values()[(i, j)]));
        }
        for j in 0..l {
            fields.push(format!("{}", data.labels().get(i, j)));
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    fs::write(path.as_ref(), out)?;
    Ok(())
}

/// Loads the sparse benchmark format: each line is
/// `lab,lab,...,lab idx:val idx:val ...` with 1-based label and feature
/// indices. An empty label field yields an all-zero label row. `d` is the
/// maximum feature index seen unless a larger `dim` is supplied.
pub fn load_sparse(path: impl AsRef<Path>, l: usize, dim: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    if l == 0 {
        return Err(Error::InvalidArgument("label count must be positive".into()));
    }
    let text = fs::read_to_string(path)?;
    let mut label_rows: Vec<Vec<u8>> = Vec::new();
    let mut feat_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_idx = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        // The label field is everything before the first space; it may be
        // empty (line starts with a space).
        let (label_field, rest) = match line.find(' ') {
            Some(p) => (&line[..p], &line[p + 1..]),
            None => (line, ""),
        };
        let mut bits = vec![0u8; l];
        if !label_field.trim().is_empty() {
            for tok in label_field.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                let lab = parse_usize(tok, path, lineno, "label index")?;
                if lab == 0 || lab > l {
                    return Err(load_err(
                        path,
                        lineno,
                        format!("label index {lab} out of range 1..={l}"),
                    ));
                }
                bits[lab - 1] = 1;
            }
        }
        let mut feats: Vec<(usize, f64)> = Vec::new();
        for tok in rest.split_whitespace() {
            let (is, vs) = tok
                .split_once(':')
                .ok_or_else(|| load_err(path, lineno, format!("expected idx:val, got `{tok}`")))?;
            let fi = parse_usize(is, path, lineno, "feature index")?;
            if fi == 0 {
                return Err(load_err(path, lineno, "feature indices are 1-based"));
            }
            let v = parse_finite(vs, path, lineno)?;
            if feats.iter().any(|&(existing, _)| existing == fi) {
                return Err(load_err(path, lineno, format!("duplicate feature index {fi}")));
            }
            max_idx = max_idx.max(fi);
            feats.push((fi, v));
        }
        label_rows.push(bits);
        feat_rows.push(feats);
    }
    if label_rows.is_empty() {
        return Err(load_err(path, 1, "no data lines"));
    }
    let d = match dim {
        Some(d) if d >= max_idx => d,
        Some(d) => {
            return Err(Error::InvalidArgument(format!(
                "supplied dimension {d} is smaller than max feature index {max_idx}"
            )))
        }
        None => max_idx.max(1),
    };
    let m = label_rows.len();
    let mut feats = Array2::zeros((m, d));
    for (i, row) in feat_rows.iter().enumerate() {
        for &(fi, v) in row {
            feats[(i, fi - 1)] = v;
        }
    }
    Dataset::new(
        FeatureMatrix::new(feats)?,
        LabelMatrix::from_rows(&label_rows)?,
    )
}

/// Loads a plain matrix file: header `m l`, then `m` rows of `l` reals.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| load_err(path, 1, "empty file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(load_err(path, 1, "header must be `m l`"));
    }
    let m = parse_usize(head[0], path, 1, "row count")?;
    let l = parse_usize(head[1], path, 1, "column count")?;
    let mut out = Array2::zeros((m, l));
    let mut row = 0usize;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if row == m {
            return Err(load_err(path, lineno, format!("expected {m} rows, found more")));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != l {
            return Err(load_err(path, lineno, format!("expected {l} fields, found {}", toks.len())));
        }
        for (j, tok) in toks.iter().enumerate() {
            out[(row, j)] = parse_finite(tok, path, lineno)?;
        }
        row += 1;
    }
    if row != m {
        return Err(load_err(path, row + 1, format!("expected {m} rows, found {row}")));
    }
    Ok(out)
}

/// Writes a matrix in the [`load_matrix`] format.
pub fn write_matrix(values: &Array2<f64>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", values.nrows(), values.ncols()));
    for row in values.rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    fs::write(path.as_ref(), out)?;
    Ok(())
}
