//! File ingestion: expression matrices (CSV/TSV, either orientation),
//! two-column label files joined on sample id, and dataset writers used
//! by the synthetic-data command.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::dataset::ExpressionDataset;
use crate::error::{Error, Result};
use crate::{Matrix, Real};

fn delimiter_for(path: &Path) -> u8 {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") | Some("tab") | Some("txt") => b'\t',
        _ => b',',
    }
}

/// Load a matrix file. Default layout: first row holds feature names
/// (first cell is the sample-id column header), each following row is one
/// sample. With `transposed`, rows are features and columns are samples.
pub fn load_matrix<P: AsRef<Path>>(
    path: P,
    transposed: bool,
) -> Result<(Matrix, Vec<String>, Vec<String>)> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter_for(path))
        .flexible(false)
        .from_path(path)?;

    let mut rows: Vec<(u64, Vec<String>)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, record.iter().map(|s| s.trim().to_string()).collect()));
    }
    if rows.len() < 2 {
        return Err(Error::Parse {
            path: path_str,
            line: 1,
            msg: "matrix file needs a header row and at least one data row".into(),
        });
    }

    let header = rows[0].1.clone();
    if header.len() < 2 {
        return Err(Error::Parse {
            path: path_str,
            line: 1,
            msg: "matrix file needs at least one data column".into(),
        });
    }
    let axis_names: Vec<String> = header[1..].to_vec();

    let mut row_names = Vec::with_capacity(rows.len() - 1);
    let mut values: Vec<Vec<Real>> = Vec::with_capacity(rows.len() - 1);
    for (line, cells) in rows.into_iter().skip(1) {
        if cells.len() != header.len() {
            return Err(Error::Parse {
                path: path_str,
                line: line as usize,
                msg: format!("expected {} cells, found {}", header.len(), cells.len()),
            });
        }
        row_names.push(cells[0].clone());
        let mut row = Vec::with_capacity(cells.len() - 1);
        for cell in &cells[1..] {
            let v: Real = cell.parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: line as usize,
                msg: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: line as usize,
                    msg: format!("non-finite value {v}"),
                });
            }
            row.push(v);
        }
        values.push(row);
    }

    let (matrix, feature_names, sample_ids) = if transposed {
        // rows are features, columns are samples
        let n = axis_names.len();
        let p = row_names.len();
        let mut m = Matrix::zeros(n, p);
        for (j, row) in values.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        (m, row_names, axis_names)
    } else {
        let m = Matrix::from_rows(&values)?;
        (m, axis_names, row_names)
    };
    Ok((matrix, feature_names, sample_ids))
}

/// Load a two-column (sample_id, label) file; labels must be 0 or 1.
pub fn load_labels<P: AsRef<Path>>(path: P) -> Result<Vec<(String, u8)>> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter_for(path))
        .flexible(false)
        .from_path(path)?;
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line()) as usize;
        if record.len() != 2 {
            return Err(Error::Parse {
                path: path_str,
                line,
                msg: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let id = record[0].trim().to_string();
        let raw = record[1].trim();
        let label: u8 = match raw.parse::<u8>() {
            Ok(0) => 0,
            Ok(1) => 1,
            Err(_) if idx == 0 => continue, // header row
            _ => {
                return Err(Error::Parse {
                    path: path_str,
                    line,
                    msg: format!("label '{raw}' must be 0 or 1"),
                })
            }
        };
        out.push((id, label));
    }
    Ok(out)
}

/// Join labels onto the matrix sample order; every sample id must appear
/// exactly once in the label file.
pub fn join_labels(sample_ids: &[String], labels: &[(String, u8)]) -> Result<Vec<u8>> {
    let mut by_id: HashMap<&str, u8> = HashMap::with_capacity(labels.len());
    for (id, label) in labels {
        if by_id.insert(id.as_str(), *label).is_some() {
            return Err(Error::Invalid(format!("duplicate label for sample '{id}'")));
        }
    }
    sample_ids
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::Invalid(format!("no label for sample '{id}'")))
        })
        .collect()
}

/// Load matrix and labels and assemble the validated dataset.
pub fn load_dataset<P: AsRef<Path>, Q: AsRef<Path>>(
    matrix_path: P,
    labels_path: Q,
    transposed: bool,
) -> Result<ExpressionDataset> {
    let (matrix, feature_names, sample_ids) = load_matrix(matrix_path, transposed)?;
    let labels = load_labels(labels_path)?;
    let joined = join_labels(&sample_ids, &labels)?;
    ExpressionDataset::new(matrix, joined, feature_names, sample_ids)
}

/// Write a dataset in the default layout (rows are samples) plus a
/// two-column label file.
pub fn write_dataset<P: AsRef<Path>, Q: AsRef<Path>>(
    ds: &ExpressionDataset,
    matrix_path: P,
    labels_path: Q,
) -> Result<()> {
    let mut m = BufWriter::new(File::create(matrix_path)?);
    write!(m, "sample_id")?;
    for name in ds.feature_names() {
        write!(m, ",{name}")?;
    }
    writeln!(m)?;
    for i in 0..ds.n_samples() {
        write!(m, "{}", ds.sample_ids()[i])?;
        for &v in ds.matrix().row(i) {
            write!(m, ",{v}")?;
        }
        writeln!(m)?;
    }
    m.flush()?;

    let mut l = BufWriter::new(File::create(labels_path)?);
    writeln!(l, "sample_id,label")?;
    for (id, &label) in ds.sample_ids().iter().zip(ds.labels()) {
        writeln!(l, "{id},{label}")?;
    }
    l.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_file(name: &str, content: &str) -> std::path::PathBuf {
        let mut path = std::env::temp_dir();
        path.push(format!("panelsel_io_{}_{name}", std::process::id()));
        std::fs::write(&path, content).unwrap();
        path
    }

    #[test]
    fn default_layout_round_trip() {
        let m = temp_file(
            "m.csv",
            "sample_id,gA,gB\ns1,1.5,2.0\ns2,0.5,1.0\ns3,2.5,3.0\ns4,0.0,0.5\n",
        );
        let l = temp_file("l.csv", "sample_id,label\ns1,1\ns2,0\ns3,1\ns4,0\n");
        let ds = load_dataset(&m, &l, false).unwrap();
        assert_eq!(ds.n_samples(), 4);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.feature_names(), &["gA".to_string(), "gB".to_string()]);
        assert_eq!(ds.labels(), &[1, 0, 1, 0]);
        assert_eq!(ds.matrix().get(2, 1), 3.0);
        std::fs::remove_file(m).ok();
        std::fs::remove_file(l).ok();
    }

    #[test]
    fn transposed_layout() {
        let m = temp_file(
            "t.csv",
            "gene,s1,s2,s3,s4\ngA,1.5,0.5,2.5,0.0\ngB,2.0,1.0,3.0,0.5\n",
        );
        let l = temp_file("tl.csv", "s1,1\ns2,0\ns3,1\ns4,0\n");
        let ds = load_dataset(&m, &l, true).unwrap();
        assert_eq!(ds.n_samples(), 4);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.sample_ids()[0], "s1");
        assert_eq!(ds.matrix().get(2, 0), 2.5);
        std::fs::remove_file(m).ok();
        std::fs::remove_file(l).ok();
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let m = temp_file("bad.csv", "sample_id,gA\ns1,1.5\ns2,oops\n");
        let err = load_matrix(&m, false).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::remove_file(m).ok();
    }

    #[test]
    fn missing_and_duplicate_labels_error() {
        let ids = vec!["s1".to_string(), "s2".to_string()];
        let missing = vec![("s1".to_string(), 1u8)];
        assert!(join_labels(&ids, &missing).is_err());
        let dup = vec![
            ("s1".to_string(), 1u8),
            ("s1".to_string(), 0u8),
            ("s2".to_string(), 0u8),
        ];
        assert!(join_labels(&ids, &dup).is_err());
    }

    #[test]
    fn multiclass_labels_rejected() {
        let l = temp_file("mc.csv", "s1,2\n");
        assert!(load_labels(&l).is_err());
        std::fs::remove_file(l).ok();
    }

    #[test]
    fn writer_and_loader_agree() {
        let spec = crate::synth::SynthSpec {
            n_samples: 12,
            n_features: 4,
            true_support: vec![(0, 1.0)],
            noise_sd: 0.5,
            correlated_blocks: vec![],
            flip_feature: None,
            seed: 3,
        };
        let (ds, _) = crate::synth::gen_linear(&spec).unwrap();
        let m = std::env::temp_dir().join(format!("panelsel_rt_m_{}.csv", std::process::id()));
        let l = std::env::temp_dir().join(format!("panelsel_rt_l_{}.csv", std::process::id()));
        write_dataset(&ds, &m, &l).unwrap();
        let back = load_dataset(&m, &l, false).unwrap();
        assert_eq!(back.labels(), ds.labels());
        assert_eq!(back.feature_names(), ds.feature_names());
        for i in 0..ds.n_samples() {
            for j in 0..ds.n_features() {
                assert_eq!(back.matrix().get(i, j), ds.matrix().get(i, j));
            }
        }
        std::fs::remove_file(m).ok();
        std::fs::remove_file(l).ok();
    }
}
