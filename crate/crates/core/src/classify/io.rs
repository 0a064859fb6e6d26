//! Manifest and split files.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{Sample, SampleRecord, Split};
use crate::error::{Error, Result};
use crate::features::read_features;

pub const MANIFEST_HEADER: &str = "sample_id,sign_code,subject_id,repetition,feature_path";

fn write_comments(out: &mut impl Write, comments: &[String]) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    Ok(())
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(fs::File::open(path).map_err(Error::at(path))?))
}

/// Reads a manifest; relative feature paths are resolved against the
/// manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<SampleRecord>> {
    let base = path.parent().unwrap_or(Path::new(""));
    let mut rdr = reader(path)?;
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if headers.join(",") != MANIFEST_HEADER {
        return Err(Error::parse(
            path,
            1,
            format!("expected header '{MANIFEST_HEADER}'"),
        ));
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row.position().map_or(n + 2, |p| p.line() as usize);
        let field = |i: usize| row.get(i).unwrap_or("");
        let number = |i: usize| -> Result<u32> {
            field(i).parse().map_err(|_| {
                Error::parse(
                    path,
                    line,
                    format!("column {} is not a positive integer", i + 1),
                )
            })
        };
        let rel = PathBuf::from(field(4));
        let record = SampleRecord {
            sample_id: field(0).to_owned(),
            sign_code: number(1)?,
            subject_id: number(2)?,
            repetition: number(3)?,
            feature_path: if rel.is_absolute() {
                rel
            } else {
                base.join(rel)
            },
        };
        record
            .validate()
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        if !seen.insert(record.sample_id.clone()) {
            return Err(Error::parse(
                path,
                line,
                format!("duplicate sample id {}", record.sample_id),
            ));
        }
        out.push(record);
    }
    Ok(out)
}

/// Writes a manifest; feature paths under the manifest's directory are
/// stored relative to it.
pub fn write_manifest(path: &Path, records: &[SampleRecord], comments: &[String]) -> Result<()> {
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out = Vec::new();
    write_comments(&mut out, comments)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(MANIFEST_HEADER.split(','))?;
        for r in records {
            let rel = r.feature_path.strip_prefix(base).unwrap_or(&r.feature_path);
            w.write_record([
                r.sample_id.as_str(),
                &r.sign_code.to_string(),
                &r.subject_id.to_string(),
                &r.repetition.to_string(),
                &rel.to_string_lossy().replace('\\', "/"),
            ])?;
        }
        w.flush()?;
    }
    fs::write(path, out)?;
    Ok(())
}

/// Loads the feature matrix of every record.
pub fn load_samples(records: &[SampleRecord]) -> Result<Vec<Sample>> {
    records
        .iter()
        .map(|r| {
            Ok(Sample {
                record: r.clone(),
                features: read_features(&r.feature_path)?,
            })
        })
        .collect()
}

/// Writes `sample_id,partition` rows for a split of `records`.
pub fn write_split(
    path: &Path,
    records: &[SampleRecord],
    split: &Split,
    comments: &[String],
) -> Result<()> {
    let mut rows: Vec<(usize, &str)> = split
        .train
        .iter()
        .map(|&i| (i, "train"))
        .chain(split.test.iter().map(|&i| (i, "test")))
        .collect();
    rows.sort();
    let mut out = Vec::new();
    write_comments(&mut out, comments)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["sample_id", "partition"])?;
        for (i, part) in rows {
            w.write_record([records[i].sample_id.as_str(), part])?;
        }
        w.flush()?;
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a split file back into indices of `records`.
pub fn read_split(path: &Path, records: &[SampleRecord]) -> Result<Split> {
    let index: HashMap<&str, usize> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.sample_id.as_str(), i))
        .collect();
    let mut rdr = reader(path)?;
    let mut split = Split::default();
    let mut seen = BTreeSet::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row.position().map_or(n + 2, |p| p.line() as usize);
        let id = row.get(0).unwrap_or("");
        let &i = index.get(id).ok_or_else(|| {
            Error::parse(path, line, format!("sample {id} is not in the manifest"))
        })?;
        if !seen.insert(i) {
            return Err(Error::parse(
                path,
                line,
                format!("sample {id} listed twice"),
            ));
        }
        match row.get(1).unwrap_or("") {
            "train" => split.train.push(i),
            "test" => split.test.push(i),
            other => {
                return Err(Error::parse(
                    path,
                    line,
                    format!("unknown partition '{other}'"),
                ))
            }
        }
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, code: u32, path: PathBuf) -> SampleRecord {
        SampleRecord {
            sample_id: id.into(),
            sign_code: code,
            subject_id: 2,
            repetition: 3,
            feature_path: path,
        }
    }

    #[test]
    fn manifest_round_trip_with_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        let records = vec![
            rec("a", 1, dir.path().join("features/a.csv")),
            rec("b", 20, dir.path().join("features/b.csv")),
        ];
        write_manifest(&path, &records, &["tool=trajsign".into()]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains(&format!("{MANIFEST_HEADER}\na,1,2,3,features/a.csv\n")));
        assert_eq!(read_manifest(&path).unwrap(), records);
    }

    #[test]
    fn manifest_rejects_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, format!("{MANIFEST_HEADER}\na,0,1,1,x.csv\n")).unwrap();
        assert!(read_manifest(&path).is_err());
        fs::write(
            &path,
            format!("{MANIFEST_HEADER}\na,1,1,1,x.csv\na,2,1,1,y.csv\n"),
        )
        .unwrap();
        assert!(read_manifest(&path).is_err());
        fs::write(&path, "id,code\n").unwrap();
        assert!(read_manifest(&path).is_err());
    }

    #[test]
    fn split_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("split.csv");
        let records: Vec<SampleRecord> = (0..5)
            .map(|i| rec(&format!("s{i}"), 1, PathBuf::new()))
            .collect();
        let split = Split {
            train: vec![1, 3],
            test: vec![0, 2, 4],
        };
        write_split(&path, &records, &split, &[]).unwrap();
        assert_eq!(read_split(&path, &records).unwrap(), split);
    }
}
