//! File formats.
//!
//! * Dissimilarities: one headerless CSV per modality, n rows of n numbers.
//! * Embeddings (CSV): header `modality,object,x1,…,xd`, one row per
//!   embedded point, modality-major. Values use the shortest representation
//!   that parses back to the same `f64`.
//! * Binary: magic `JOFC`, version `u32`, then `n`, `m`, `d` as `u64`, then
//!   little-endian `f64` payload. `d > 0` is an embedding (`m·n·d` values,
//!   modality-major rows); `d = 0` is a problem (`m` row-major n×n matrices).
//! * Index lists (labels, anomalies) and out-of-sample vectors: numbers
//!   separated by commas, whitespace or newlines.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{JofcError, Result};
use crate::matrix::{DenseMatrix, DissimilarityMatrix};
use crate::problem::{Configuration, OmnibusProblem};

const MAGIC: &[u8; 4] = b"JOFC";
const VERSION: u32 = 1;

fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| JofcError::parse(path, e.to_string()))?;
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| JofcError::parse(path, e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| JofcError::parse(path, format!("row {r}, column {c}: cannot parse {field:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads one dissimilarity matrix. A nonzero diagonal is forced to zero
/// with a warning; asymmetry within 1e-9 is averaged away; negative
/// entries are an error.
pub fn load_dissimilarity(path: &Path) -> Result<DissimilarityMatrix> {
    let rows = read_csv_rows(path)?;
    let n = rows.len();
    if n == 0 {
        return Err(JofcError::parse(path, "empty matrix"));
    }
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
        return Err(JofcError::parse(
            path,
            format!("row {r} has {} entries, expected {n}", row.len()),
        ));
    }
    let mut m = DenseMatrix::new(n, n, rows.into_iter().flatten().collect())
        .map_err(|e| JofcError::parse(path, e.to_string()))?;
    for i in 0..n {
        if m[(i, i)] != 0.0 {
            log::warn!("{}: diagonal entry ({i}, {i}) = {} set to 0", path.display(), m[(i, i)]);
            m[(i, i)] = 0.0;
        }
    }
    DissimilarityMatrix::new(m).map_err(|e| JofcError::parse(path, e.to_string()))
}

/// Reads one matrix per modality; all must have the same order.
pub fn load_dissimilarities<P: AsRef<Path>>(paths: &[P]) -> Result<OmnibusProblem> {
    if paths.is_empty() {
        return Err(JofcError::InvalidInput("no dissimilarity files given".into()));
    }
    let mut modalities = Vec::with_capacity(paths.len());
    for path in paths {
        let path = path.as_ref();
        let delta = load_dissimilarity(path)?;
        if let Some(first) = modalities.first().map(DissimilarityMatrix::n) {
            if delta.n() != first {
                return Err(JofcError::parse(
                    path,
                    format!("matrix is {0}x{0}, earlier files are {first}x{first}", delta.n()),
                ));
            }
        }
        modalities.push(delta);
    }
    OmnibusProblem::new(modalities)
}

pub fn save_dissimilarity(delta: &DissimilarityMatrix, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| JofcError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for i in 0..delta.n() {
        let line: Vec<String> = delta.matrix().row(i).iter().map(f64::to_string).collect();
        writeln!(out, "{}", line.join(",")).map_err(|e| JofcError::io(path, e))?;
    }
    out.flush().map_err(|e| JofcError::io(path, e))
}

pub fn save_embedding_csv(config: &Configuration, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| JofcError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let header: Vec<String> = (1..=config.d()).map(|t| format!("x{t}")).collect();
    writeln!(out, "modality,object,{}", header.join(",")).map_err(|e| JofcError::io(path, e))?;
    for i in 0..config.m() {
        for j in 0..config.n() {
            let coords: Vec<String> = config.point(i, j).iter().map(f64::to_string).collect();
            writeln!(out, "{i},{j},{}", coords.join(",")).map_err(|e| JofcError::io(path, e))?;
        }
    }
    out.flush().map_err(|e| JofcError::io(path, e))
}

pub fn load_embedding_csv(path: &Path) -> Result<Configuration> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| JofcError::parse(path, e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| JofcError::parse(path, e.to_string()))?
        .clone();
    if header.len() < 3 || &header[0] != "modality" || &header[1] != "object" {
        return Err(JofcError::parse(path, "expected header modality,object,x1,..."));
    }
    let d = header.len() - 2;
    let mut entries: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| JofcError::parse(path, e.to_string()))?;
        let bad = |what: &str| JofcError::parse(path, format!("data row {r}: {what}"));
        let i: usize = record[0].parse().map_err(|_| bad("bad modality index"))?;
        let j: usize = record[1].parse().map_err(|_| bad("bad object index"))?;
        let coords = (2..2 + d)
            .map(|c| record[c].parse::<f64>().map_err(|_| bad(&format!("bad coordinate {:?}", &record[c]))))
            .collect::<Result<Vec<f64>>>()?;
        entries.push((i, j, coords));
    }
    let m = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
    let n = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
    if m == 0 || entries.len() != m * n {
        return Err(JofcError::parse(
            path,
            format!("{} rows do not form a complete {m} x {n} embedding", entries.len()),
        ));
    }
    let mut data = vec![f64::NAN; m * n * d];
    let mut seen = vec![false; m * n];
    for (i, j, coords) in entries {
        let row = i * n + j;
        if std::mem::replace(&mut seen[row], true) {
            return Err(JofcError::parse(path, format!("duplicate row for modality {i}, object {j}")));
        }
        data[row * d..(row + 1) * d].copy_from_slice(&coords);
    }
    let points = DenseMatrix::new(m * n, d, data).map_err(|e| JofcError::parse(path, e.to_string()))?;
    Configuration::new(points, m, n)
}

fn write_binary(path: &Path, n: usize, m: usize, d: usize, values: impl Iterator<Item = f64>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| JofcError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut put = |bytes: &[u8]| out.write_all(bytes).map_err(|e| JofcError::io(path, e));
    put(MAGIC)?;
    put(&VERSION.to_le_bytes())?;
    for v in [n, m, d] {
        put(&(v as u64).to_le_bytes())?;
    }
    for v in values {
        put(&v.to_le_bytes())?;
    }
    out.flush().map_err(|e| JofcError::io(path, e))
}

fn read_binary(path: &Path) -> Result<(usize, usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| JofcError::io(path, e))?;
    const HEADER: usize = 4 + 4 + 3 * 8;
    if bytes.len() < HEADER || &bytes[..4] != MAGIC {
        return Err(JofcError::parse(path, "not a JOFC binary file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(JofcError::parse(path, format!("unsupported version {version}")));
    }
    let field = |k: usize| {
        let start = 8 + 8 * k;
        u64::from_le_bytes(bytes[start..start + 8].try_into().expect("8 bytes")) as usize
    };
    let (n, m, d) = (field(0), field(1), field(2));
    let count = if d > 0 { m * n * d } else { m * n * n };
    let payload = &bytes[HEADER..];
    if payload.len() != count * 8 {
        return Err(JofcError::parse(
            path,
            format!("payload holds {} bytes, header implies {}", payload.len(), count * 8),
        ));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((n, m, d, values))
}

pub fn save_embedding_binary(config: &Configuration, path: &Path) -> Result<()> {
    write_binary(
        path,
        config.n(),
        config.m(),
        config.d(),
        config.stacked().as_slice().iter().copied(),
    )
}

pub fn load_embedding_binary(path: &Path) -> Result<Configuration> {
    let (n, m, d, values) = read_binary(path)?;
    if d == 0 {
        return Err(JofcError::parse(path, "file holds a problem, not an embedding"));
    }
    let points = DenseMatrix::new(m * n, d, values).map_err(|e| JofcError::parse(path, e.to_string()))?;
    Configuration::new(points, m, n)
}

pub fn save_problem_binary(problem: &OmnibusProblem, path: &Path) -> Result<()> {
    let values = problem
        .modalities()
        .iter()
        .flat_map(|delta| delta.matrix().as_slice().iter().copied());
    write_binary(path, problem.n(), problem.m(), 0, values)
}

pub fn load_problem_binary(path: &Path) -> Result<OmnibusProblem> {
    let (n, m, d, values) = read_binary(path)?;
    if d != 0 {
        return Err(JofcError::parse(path, "file holds an embedding, not a problem"));
    }
    let modalities = values
        .chunks_exact(n * n)
        .map(|chunk| DissimilarityMatrix::new(DenseMatrix::new(n, n, chunk.to_vec())?))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| JofcError::parse(path, e.to_string()))?;
    if modalities.len() != m {
        return Err(JofcError::parse(path, "modality count does not match payload"));
    }
    OmnibusProblem::new(modalities)
}

/// Embedding in either format, chosen by the `.bin` extension.
pub fn load_embedding(path: &Path) -> Result<Configuration> {
    if path.extension().is_some_and(|e| e == "bin") {
        load_embedding_binary(path)
    } else {
        load_embedding_csv(path)
    }
}

pub fn save_embedding(config: &Configuration, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e == "bin") {
        save_embedding_binary(config, path)
    } else {
        save_embedding_csv(config, path)
    }
}

fn read_tokens(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| JofcError::io(path, e))?;
    Ok(text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect())
}

pub fn load_indices(path: &Path) -> Result<Vec<usize>> {
    read_tokens(path)?
        .iter()
        .map(|t| t.parse().map_err(|_| JofcError::parse(path, format!("bad index {t:?}"))))
        .collect()
}

pub fn save_indices(values: &[usize], path: &Path) -> Result<()> {
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    fs::write(path, text).map_err(|e| JofcError::io(path, e))
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    read_tokens(path)?
        .iter()
        .enumerate()
        .map(|(k, t)| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| JofcError::parse(path, format!("entry {k}: cannot parse {t:?}")))
        })
        .collect()
}
