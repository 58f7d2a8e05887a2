//! Problem files: CSV tables with explicit real and imaginary columns.
//!
//! Samples use `x_re, x_im, f_re, f_im`; interpolation constraints use
//! `t_re, t_im, y_re, y_im`. Imaginary columns may be omitted. Lines
//! starting with `#` are comments, and a leading `# degree = N` line records
//! the intended degree.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use bdlawson::{Complex64, InterpolationData, SampleSet};

use crate::format::num;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub samples: SampleSet,
    pub interp: InterpolationData,
    pub degree: Option<usize>,
}

impl ProblemFile {
    pub fn load(samples: &Path, interp: Option<&Path>) -> Result<Self, CliError> {
        let (sample_rows, degree) = read_pairs(samples, ("x", "f"))?;
        let (interp_rows, _) = match interp {
            Some(p) => read_pairs(p, ("t", "y"))?,
            None => (vec![], None),
        };
        let file = samples.display();
        check_distinct(&sample_rows, |a, b| {
            format!("{file}: data rows {a} and {b} have the same node")
        })?;
        if let Some(p) = interp {
            let ifile = p.display();
            check_distinct(&interp_rows, |a, b| {
                format!("{ifile}: data rows {a} and {b} have the same node")
            })?;
            let sample_index: HashMap<_, _> = sample_rows.iter().map(|r| (key(r.0), r.2)).collect();
            for r in &interp_rows {
                if let Some(s) = sample_index.get(&key(r.0)) {
                    return Err(CliError::Input(format!(
                        "{ifile}: data row {} coincides with {file} data row {s}; interpolation nodes must not be samples",
                        r.2
                    )));
                }
            }
        }
        let samples = SampleSet::new(
            sample_rows.iter().map(|r| r.0).collect(),
            sample_rows.iter().map(|r| r.1).collect(),
        )
        .map_err(|e| CliError::Input(format!("{file}: {e}")))?;
        let interp = InterpolationData::new(
            interp_rows.iter().map(|r| r.0).collect(),
            interp_rows.iter().map(|r| r.1).collect(),
        )
        .map_err(|e| CliError::Input(e.to_string()))?;
        Ok(ProblemFile {
            samples,
            interp,
            degree,
        })
    }
}

fn key(z: Complex64) -> (u64, u64) {
    // +0.0 and -0.0 are the same node.
    ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits())
}

fn check_distinct(rows: &[Row], msg: impl Fn(usize, usize) -> String) -> Result<(), CliError> {
    let mut seen = HashMap::new();
    for r in rows {
        if let Some(prev) = seen.insert(key(r.0), r.2) {
            return Err(CliError::Input(msg(prev, r.2)));
        }
    }
    Ok(())
}

/// Data rows are numbered from 1, not counting the header or comments.
/// `(node, value, data row)`.
type Row = (Complex64, Complex64, usize);

fn read_pairs(path: &Path, prefixes: (&str, &str)) -> Result<(Vec<Row>, Option<usize>), CliError> {
    let table = read_table(path, &[prefixes.0, prefixes.1])?;
    let rows = table
        .rows
        .into_iter()
        .map(|(row, vals)| (vals[0], vals[1], row))
        .collect();
    Ok((rows, table.degree))
}

/// Nodes from a CSV with columns `x_re[, x_im]`.
pub fn read_points(path: &Path) -> Result<Vec<Complex64>, CliError> {
    Ok(read_table(path, &["x"])?
        .rows
        .into_iter()
        .map(|(_, v)| v[0])
        .collect())
}

/// Free support nodes from a CSV with columns `t_re[, t_im]`.
pub fn read_support(path: &Path) -> Result<Vec<Complex64>, CliError> {
    Ok(read_table(path, &["t"])?
        .rows
        .into_iter()
        .map(|(_, v)| v[0])
        .collect())
}

struct Table {
    rows: Vec<(usize, Vec<Complex64>)>,
    degree: Option<usize>,
}

fn parse_degree_comment(line: &str) -> Option<Result<usize, String>> {
    let body = line.trim_start_matches('#').trim();
    let (k, v) = body.split_once('=')?;
    if k.trim() != "degree" {
        return None;
    }
    Some(
        v.trim()
            .parse()
            .map_err(|_| format!("cannot parse degree '{}'", v.trim())),
    )
}

fn read_table(path: &Path, prefixes: &[&str]) -> Result<Table, CliError> {
    let file = path.display();
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{file}: {e}")))?;
    let mut degree = None;
    for line in text
        .lines()
        .take_while(|l| l.trim_start().starts_with('#') || l.trim().is_empty())
    {
        if let Some(d) = parse_degree_comment(line) {
            degree = Some(d.map_err(|e| CliError::Input(format!("{file}: {e}")))?);
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{file}: {e}")))?
        .clone();
    if headers.is_empty() && text.trim().lines().all(|l| l.trim_start().starts_with('#')) {
        return Ok(Table {
            rows: vec![],
            degree,
        });
    }
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut columns = Vec::new();
    for p in prefixes {
        let re = format!("{p}_re");
        let im = format!("{p}_im");
        let re_idx = find(&re).ok_or_else(|| {
            CliError::Input(format!(
                "{file}: missing column '{re}' (header is '{}')",
                headers.iter().collect::<Vec<_>>().join(",")
            ))
        })?;
        columns.push((re, re_idx, im.clone(), find(&im)));
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CliError::Input(format!("{file}: data row {row}: {e}")))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |name: &str, idx: usize| -> Result<f64, CliError> {
            let s = record.get(idx).unwrap_or("");
            let v: f64 = s.parse().map_err(|_| {
                CliError::Input(format!(
                    "{file}: line {line} (data row {row}), column '{name}': cannot parse '{s}' as a number"
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Input(format!(
                    "{file}: line {line} (data row {row}), column '{name}': value '{s}' is not finite"
                )));
            }
            Ok(v)
        };
        let mut vals = Vec::with_capacity(columns.len());
        for (re, re_idx, im, im_idx) in &columns {
            let x = field(re, *re_idx)?;
            let y = match im_idx {
                Some(j) => field(im, *j)?,
                None => 0.0,
            };
            vals.push(Complex64::new(x, y));
        }
        rows.push((row, vals));
    }
    Ok(Table { rows, degree })
}

pub fn write_samples(
    path: &Path,
    samples: &SampleSet,
    degree: Option<usize>,
) -> std::io::Result<()> {
    let mut out = String::new();
    if let Some(n) = degree {
        out.push_str(&format!("# degree = {n}\n"));
    }
    out.push_str("x_re,x_im,f_re,f_im\n");
    for (x, f) in samples.nodes().iter().zip(samples.values()) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            num(x.re),
            num(x.im),
            num(f.re),
            num(f.im)
        ));
    }
    fs::File::create(path)?.write_all(out.as_bytes())
}

pub fn write_interp(path: &Path, interp: &InterpolationData) -> std::io::Result<()> {
    let mut out = String::from("t_re,t_im,y_re,y_im\n");
    for (t, y) in interp.nodes().iter().zip(interp.values()) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            num(t.re),
            num(t.im),
            num(y.re),
            num(y.im)
        ));
    }
    fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn reads_samples_with_degree_header() {
        let dir = tempfile::tempdir().unwrap();
        let s = write(
            dir.path(),
            "s.csv",
            "# degree = 3\nx_re,x_im,f_re,f_im\n0,0,1,0\n0.5,0,2,-1\n",
        );
        let p = ProblemFile::load(&s, None).unwrap();
        assert_eq!(p.degree, Some(3));
        assert_eq!(p.samples.len(), 2);
        assert_eq!(p.samples.values()[1], Complex64::new(2.0, -1.0));
    }

    #[test]
    fn imaginary_columns_are_optional() {
        let dir = tempfile::tempdir().unwrap();
        let s = write(dir.path(), "s.csv", "x_re,f_re\n1,2\n3,4\n");
        let p = ProblemFile::load(&s, None).unwrap();
        assert_eq!(p.degree, None);
        assert_eq!(p.samples.nodes()[1], Complex64::new(3.0, 0.0));
    }

    #[test]
    fn bad_number_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let s = write(
            dir.path(),
            "s.csv",
            "x_re,x_im,f_re,f_im\n0,0,1,0\n1,0,abc,0\n",
        );
        let err = ProblemFile::load(&s, None).unwrap_err().to_string();
        assert!(
            err.contains("data row 2") && err.contains("'f_re'") && err.contains("abc"),
            "{err}"
        );
    }

    #[test]
    fn duplicate_node_names_rows() {
        let dir = tempfile::tempdir().unwrap();
        let s = write(
            dir.path(),
            "s.csv",
            "x_re,x_im,f_re,f_im\n0,0,1,0\n1,0,1,0\n-0,0,2,0\n",
        );
        let err = ProblemFile::load(&s, None).unwrap_err().to_string();
        assert!(err.contains("data rows 1 and 3"), "{err}");
    }

    #[test]
    fn interpolation_node_on_sample_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let s = write(dir.path(), "s.csv", "x_re,f_re\n0,1\n1,1\n2,1\n");
        let i = write(dir.path(), "i.csv", "t_re,y_re\n5,1\n2,0\n");
        let err = ProblemFile::load(&s, Some(&i)).unwrap_err().to_string();
        assert!(
            err.contains("data row 2") && err.contains("data row 3"),
            "{err}"
        );
    }

    #[test]
    fn missing_column() {
        let dir = tempfile::tempdir().unwrap();
        let s = write(dir.path(), "s.csv", "x,f\n0,1\n");
        let err = ProblemFile::load(&s, None).unwrap_err().to_string();
        assert!(err.contains("missing column 'x_re'"), "{err}");
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let xs: Vec<f64> = (0..5).map(|j| j as f64 / 7.0).collect();
        let samples = SampleSet::from_real_fn(&xs, f64::sin).unwrap();
        let p = dir.path().join("s.csv");
        write_samples(&p, &samples, Some(2)).unwrap();
        let back = ProblemFile::load(&p, None).unwrap();
        assert_eq!(back.samples, samples);
        assert_eq!(back.degree, Some(2));
    }

    #[test]
    fn empty_points_file() {
        let dir = tempfile::tempdir().unwrap();
        assert!(read_points(&write(dir.path(), "a.csv", ""))
            .unwrap()
            .is_empty());
        assert!(read_points(&write(dir.path(), "b.csv", "x_re,x_im\n"))
            .unwrap()
            .is_empty());
    }
}
