//! Column-oriented numeric tables: CSV ingestion, row splitting and
//! per-column standardization.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::{hex, write_atomic};

/// An immutable table of `n` rows by `m` named numeric columns.
///
/// Every cell is finite, every column has the same length `n >= 1` and
/// column names are unique and non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidTable(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::EmptyTable("no columns".into()));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::EmptyTable("no rows".into()));
        }
        let mut seen = HashSet::new();
        for (name, col) in names.iter().zip(&columns) {
            if name.is_empty() {
                return Err(Error::InvalidTable("empty column name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidTable(format!("duplicate column name '{name}'")));
            }
            if col.len() != n {
                return Err(Error::InvalidTable(format!(
                    "column '{name}' has {} rows, expected {n}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidTable(format!(
                    "non-finite value in column '{name}' at row {i}"
                )));
            }
        }
        Ok(Self { names, columns })
    }

    /// Builds a table from `(name, column)` pairs.
    pub fn from_columns<S: Into<String>>(cols: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let (names, columns) = cols.into_iter().map(|(n, c)| (n.into(), c)).unzip();
        Self::new(names, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, idx: usize) -> &[f64] {
        &self.columns[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column_by_name(&self, name: &str) -> Result<&[f64]> {
        self.index_of(name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// New table made of the given rows, in the given order. Indices may repeat.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Self::new(self.names.clone(), columns)
    }

    /// Copy of the table with one column's values swapped out.
    pub fn with_column(&self, name: &str, values: Vec<f64>) -> Result<Self> {
        let idx = self
            .index_of(name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
        let mut columns = self.columns.clone();
        columns[idx] = values;
        Self::new(self.names.clone(), columns)
    }

    /// Hash of column names and row count, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for name in &self.names {
            h.update(name.as_bytes());
            h.update([0x1f]);
        }
        h.update((self.n_rows() as u64).to_le_bytes());
        hex(&h.finalize()[..16])
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.names)?;
        for i in 0..self.n_rows() {
            w.write_record(self.columns.iter().map(|c| c[i].to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidTable(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string()?.as_bytes())
    }
}

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub drop_incomplete_rows: bool,
    pub select_columns: Option<Vec<String>>,
}

fn parse_cell(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a headered CSV file into a [`DataTable`].
///
/// Without `select_columns`, a column is kept when at least half of its cells
/// parse as finite numbers; other columns are treated as text and ignored.
pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<DataTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, options)
}

pub fn read_csv<R: std::io::Read>(reader: R, options: &CsvOptions) -> Result<DataTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for rec in rdr.records() {
        let rec = rec?;
        for (j, cell) in rec.iter().enumerate() {
            raw[j].push(cell.to_string());
        }
    }

    let keep: Vec<usize> = match &options.select_columns {
        Some(sel) => sel
            .iter()
            .map(|s| {
                header
                    .iter()
                    .position(|h| h == s)
                    .ok_or_else(|| Error::UnknownFeature(s.clone()))
            })
            .collect::<Result<_>>()?,
        None => (0..header.len())
            .filter(|&j| {
                let ok = raw[j].iter().filter(|c| parse_cell(c).is_some()).count();
                ok > 0 && 2 * ok >= raw[j].len()
            })
            .collect(),
    };
    if keep.is_empty() {
        return Err(Error::EmptyTable("no numeric columns".into()));
    }

    let n_raw = raw[0].len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(n_raw); keep.len()];
    'rows: for i in 0..n_raw {
        let mut row = Vec::with_capacity(keep.len());
        for &j in &keep {
            match parse_cell(&raw[j][i]) {
                Some(v) => row.push(v),
                None if options.drop_incomplete_rows => continue 'rows,
                None => {
                    return Err(Error::Parse {
                        // 1-based data row, header excluded
                        row: i + 1,
                        column: header[j].clone(),
                    })
                }
            }
        }
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(Error::EmptyTable("no rows remain".into()));
    }
    DataTable::new(keep.iter().map(|&j| header[j].clone()).collect(), columns)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub baseline: DataTable,
    pub field: DataTable,
    pub seed: u64,
    pub fraction: f64,
}

/// Random row split: `floor(fraction * n)` rows drawn without replacement go
/// to the baseline, the rest (in original order) to the field table.
pub fn split_rows(table: &DataTable, fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidFraction(fraction));
    }
    let n = table.n_rows();
    let n_base = (fraction * n as f64).floor() as usize;
    if n < 2 || n_base == 0 {
        return Err(Error::TableTooSmall { rows: n, needed: 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = index::sample(&mut rng, n, n_base).into_vec();
    chosen.sort_unstable();
    let mut in_base = vec![false; n];
    for &i in &chosen {
        in_base[i] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !in_base[i]).collect();
    Ok(SplitPair {
        baseline: table.select_rows(&chosen)?,
        field: table.select_rows(&rest)?,
        seed,
        fraction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats {
    pub mean: f64,
    /// Population standard deviation (divides by the length).
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn column_stats(column: &[f64]) -> ColumnStats {
    assert!(!column.is_empty(), "column_stats on empty column");
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let (min, max) = column
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    // clamp rounding so that min <= mean <= max holds
    ColumnStats {
        mean: mean.clamp(min, max),
        std: var.sqrt(),
        min,
        max,
    }
}

/// Centers and scales a column to mean 0, population std 1.
pub fn standardize(column: &[f64]) -> Result<(Vec<f64>, ColumnStats)> {
    let stats = column_stats(column);
    if !(stats.std > 0.0) {
        return Err(Error::ZeroVariance(format!("<{} values>", column.len())));
    }
    let z = column.iter().map(|v| (v - stats.mean) / stats.std).collect();
    Ok((z, stats))
}

pub fn unstandardize(z: &[f64], stats: &ColumnStats) -> Vec<f64> {
    z.iter().map(|v| v * stats.std + stats.mean).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn csv_table(s: &str, drop: bool) -> Result<DataTable> {
        read_csv(
            s.as_bytes(),
            &CsvOptions {
                drop_incomplete_rows: drop,
                select_columns: None,
            },
        )
    }

    #[test]
    fn loads_simple_csv() {
        let t = csv_table("a,b\n1,2\n3,4\n", false).unwrap();
        assert_eq!(t.names(), ["a", "b"]);
        assert_eq!(t.columns(), [vec![1.0, 3.0], vec![2.0, 4.0]]);
        assert_eq!((t.n_rows(), t.n_cols()), (2, 2));
    }

    #[test]
    fn drops_incomplete_rows_when_asked() {
        let t = csv_table("a,b\n1,x\n3,4\n", true).unwrap();
        assert_eq!(t.n_rows(), 1);
        assert_eq!(t.row(0), vec![3.0, 4.0]);
    }

    #[test]
    fn bad_cell_is_an_error_without_dropping() {
        match csv_table("a,b\n1,x\n3,4\n", false) {
            Err(Error::Parse { row, column }) => {
                assert_eq!(row, 1);
                assert_eq!(column, "b");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn text_only_file_is_empty() {
        assert!(matches!(
            csv_table("name,city\nx,y\nz,w\n", true),
            Err(Error::EmptyTable(_))
        ));
    }

    #[test]
    fn text_columns_are_ignored() {
        let t = csv_table("id,name,v\n1,ann,0.5\n2,bob,1.5\n", false).unwrap();
        assert_eq!(t.names(), ["id", "v"]);
    }

    #[test]
    fn select_columns_restricts_and_orders() {
        let t = read_csv(
            "a,b,c\n1,2,3\n4,5,6\n".as_bytes(),
            &CsvOptions {
                drop_incomplete_rows: false,
                select_columns: Some(vec!["c".into(), "a".into()]),
            },
        )
        .unwrap();
        assert_eq!(t.names(), ["c", "a"]);
        assert_eq!(t.column(0), [3.0, 6.0]);
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_csv(Path::new("/nonexistent/x.csv"), &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::FileNotFound(_)));
        assert!(err.to_string().contains("/nonexistent/x.csv"));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(DataTable::from_columns(vec![("a", vec![1.0]), ("a", vec![2.0])]).is_err());
        assert!(DataTable::from_columns(vec![("a", vec![1.0]), ("b", vec![2.0, 3.0])]).is_err());
        assert!(DataTable::from_columns(vec![("a", vec![f64::NAN])]).is_err());
        assert!(DataTable::from_columns(vec![("", vec![1.0])]).is_err());
        assert!(DataTable::from_columns::<&str>(vec![]).is_err());
    }

    #[test]
    fn split_sizes_follow_floor_rule() {
        let t = DataTable::from_columns(vec![("a", (0..100).map(f64::from).collect())]).unwrap();
        let s = split_rows(&t, 0.5, 7).unwrap();
        assert_eq!((s.baseline.n_rows(), s.field.n_rows()), (50, 50));

        let t5 = DataTable::from_columns(vec![("a", (0..5).map(f64::from).collect())]).unwrap();
        let s5 = split_rows(&t5, 0.5, 7).unwrap();
        assert_eq!((s5.baseline.n_rows(), s5.field.n_rows()), (2, 3));
    }

    #[test]
    fn split_is_deterministic_and_validates_fraction() {
        let t = DataTable::from_columns(vec![("a", (0..30).map(f64::from).collect())]).unwrap();
        assert_eq!(split_rows(&t, 0.3, 11).unwrap(), split_rows(&t, 0.3, 11).unwrap());
        assert!(matches!(split_rows(&t, 0.0, 1), Err(Error::InvalidFraction(_))));
        assert!(matches!(split_rows(&t, 1.0, 1), Err(Error::InvalidFraction(_))));
    }

    #[test]
    fn stats_examples() {
        let s = column_stats(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 0.816_496_580_927_726).abs() < 1e-12);
        assert_eq!((s.min, s.max), (1.0, 3.0));

        let s = column_stats(&[5.0]);
        assert_eq!((s.mean, s.std, s.min, s.max), (5.0, 0.0, 5.0, 5.0));
        assert_eq!(column_stats(&[2.5; 4]).std, 0.0);
    }

    #[test]
    fn standardize_examples() {
        let (z, _) = standardize(&[1.0, 2.0, 3.0]).unwrap();
        let expect = [-1.224_744_871_391_589, 0.0, 1.224_744_871_391_589];
        for (a, b) in z.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9);
        }
        let (zz, _) = standardize(&z).unwrap();
        for (a, b) in z.iter().zip(&zz) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(standardize(&[4.0, 4.0, 4.0]), Err(Error::ZeroVariance(_))));
    }

    proptest! {
        #[test]
        fn standardize_round_trips(xs in prop::collection::vec(-1e3f64..1e3, 2..50)) {
            prop_assume!(column_stats(&xs).std > 1e-6);
            let (z, st) = standardize(&xs).unwrap();
            let zs = column_stats(&z);
            prop_assert!(zs.mean.abs() < 1e-12);
            prop_assert!((zs.std - 1.0).abs() < 1e-12);
            for (a, b) in unstandardize(&z, &st).iter().zip(&xs) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn split_preserves_row_multiset(n in 2usize..60, f in 0.05f64..0.95, seed: u64) {
            let t = DataTable::from_columns(vec![
                ("a", (0..n).map(|i| i as f64).collect()),
                ("b", (0..n).map(|i| (i * i) as f64).collect()),
            ]).unwrap();
            prop_assume!((f * n as f64).floor() >= 1.0);
            let s = split_rows(&t, f, seed).unwrap();
            prop_assert_eq!(s.baseline.n_rows() + s.field.n_rows(), n);
            let mut rows: Vec<Vec<u64>> = (0..s.baseline.n_rows()).map(|i| s.baseline.row(i))
                .chain((0..s.field.n_rows()).map(|i| s.field.row(i)))
                .map(|r| r.iter().map(|v| v.to_bits()).collect())
                .collect();
            rows.sort();
            let mut orig: Vec<Vec<u64>> = (0..n)
                .map(|i| t.row(i).iter().map(|v| v.to_bits()).collect())
                .collect();
            orig.sort();
            prop_assert_eq!(rows, orig);
        }

        #[test]
        fn csv_write_read_is_fixed_point(
            cols in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 5), 1..4)
        ) {
            let names = (0..cols.len()).map(|i| format!("c{i}")).collect();
            let t = DataTable::new(names, cols).unwrap();
            let back = csv_table(&t.to_csv_string().unwrap(), false).unwrap();
            prop_assert_eq!(&back, &t);
        }
    }
}
