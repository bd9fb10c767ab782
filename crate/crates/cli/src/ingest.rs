//! Reading data, group and constraint files into a design matrix, and writing
//! a parsed design back out in the same format.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use ala_core::data_model::{ConstraintSet, DesignMatrix};
use ala_core::Error as EngineError;

use crate::error::{CliError, CliResult};

/// Column name used for the constant column added by `--intercept`.
pub const INTERCEPT_COLUMN: &str = "(intercept)";
/// Group label of the added intercept.
pub const INTERCEPT_GROUP: &str = "intercept";

/// A CSV file held as strings, with the source line of every record.
pub struct Table {
    pub path: PathBuf,
    pub headers: Vec<String>,
    pub rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    pub fn read(path: &Path, has_headers: bool) -> CliResult<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_headers)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let headers = if has_headers {
            rdr.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect()
        } else {
            Vec::new()
        };
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(str::is_empty) {
                continue;
            }
            rows.push((line, rec.iter().map(str::to_string).collect()));
        }
        let mut seen = HashMap::new();
        for (i, h) in headers.iter().enumerate() {
            if let Some(prev) = seen.insert(h.as_str(), i) {
                return Err(CliError::parse(path, 1, format!("duplicate column `{h}` (positions {} and {})", prev + 1, i + 1)));
            }
        }
        Ok(Self { path: path.to_path_buf(), headers, rows })
    }

    pub fn index_of(&self, name: &str) -> CliResult<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::MissingColumn { file: self.path.clone(), name: name.to_string() })
    }

    /// Numeric column; empty and non-finite cells are rejected.
    pub fn numeric(&self, col: usize) -> CliResult<Vec<f64>> {
        self.rows
            .iter()
            .map(|(line, row)| {
                let cell = &row[col];
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(CliError::parse(
                        &self.path,
                        *line,
                        format!("column `{}`: `{cell}` is not a finite number", self.headers[col]),
                    )),
                }
            })
            .collect()
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        kind => CliError::parse(path, line, format!("{kind:?}")),
    }
}

pub struct IngestArgs<'a> {
    pub data: &'a Path,
    pub groups: &'a Path,
    pub constraints: Option<&'a Path>,
    pub response: &'a str,
    pub status: Option<&'a str>,
    pub intercept: bool,
}

/// Parsed inputs. Groups are ordered by id, with an added intercept first.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub design: DesignMatrix,
    pub response: Vec<f64>,
    pub status: Option<Vec<f64>>,
    pub group_labels: Vec<String>,
    /// `(child, parent)` group indices.
    pub requires: Vec<(usize, usize)>,
}

impl Dataset {
    /// Constraint set with the intercept forced.
    pub fn constraint_set(&self) -> CliResult<ConstraintSet> {
        let j = self.group_labels.len();
        let mut set = ConstraintSet::new(j, j, &self.requires).map_err(|e| match e {
            EngineError::CyclicConstraints { cycle } => {
                CliError::Cycle { cycle: cycle.iter().map(|&g| self.group_labels[g].clone()).collect() }
            }
            other => other.into(),
        })?;
        if let Some(g) = self.design.intercept_group() {
            set = set.force(g);
        }
        Ok(set)
    }

    pub fn group_index(&self, label: &str) -> Option<usize> {
        self.group_labels.iter().position(|l| l == label)
    }
}

fn parse_group_id(table: &Table, line: u64, cell: &str) -> CliResult<u64> {
    cell.parse::<u64>()
        .map_err(|_| CliError::parse(&table.path, line, format!("group id `{cell}` is not a non-negative integer")))
}

pub fn ingest(args: &IngestArgs<'_>) -> CliResult<Dataset> {
    let data = Table::read(args.data, true)?;
    let groups = Table::read(args.groups, true)?;
    if groups.headers.len() < 2 {
        return Err(CliError::parse(&groups.path, 1, "expected a header `column,group`"));
    }
    if data.rows.is_empty() {
        return Err(CliError::parse(&data.path, 2, "no data rows"));
    }

    let mut by_group: BTreeMap<u64, Vec<String>> = BTreeMap::new();
    let mut assigned: HashMap<String, u64> = HashMap::new();
    for (line, row) in &groups.rows {
        let (name, id) = (&row[0], parse_group_id(&groups, *line, &row[1])?);
        if name == args.response || Some(name.as_str()) == args.status {
            return Err(CliError::parse(&groups.path, *line, format!("column `{name}` is the response")));
        }
        if assigned.insert(name.clone(), id).is_some() {
            return Err(CliError::parse(&groups.path, *line, format!("column `{name}` assigned twice")));
        }
        by_group.entry(id).or_default().push(name.clone());
    }
    if by_group.is_empty() && !args.intercept {
        return Err(CliError::parse(&groups.path, 2, "no columns assigned to groups"));
    }

    let n = data.rows.len();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut names = Vec::new();
    let mut sizes = Vec::new();
    let mut labels = Vec::new();
    if args.intercept {
        columns.push(vec![1.0; n]);
        names.push(INTERCEPT_COLUMN.to_string());
        sizes.push(1);
        labels.push(INTERCEPT_GROUP.to_string());
    }
    for (id, cols) in &by_group {
        for c in cols {
            columns.push(data.numeric(data.index_of(c)?)?);
            names.push(c.clone());
        }
        sizes.push(cols.len());
        labels.push(id.to_string());
    }
    let values = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
    let mut design = DesignMatrix::new(values, &sizes)?.with_column_names(names)?;
    if args.intercept {
        design = design.with_intercept_group(0)?;
    }

    let response = data.numeric(data.index_of(args.response)?)?;
    let status = match args.status {
        Some(s) => {
            let col = data.index_of(s)?;
            let v = data.numeric(col)?;
            for ((line, _), x) in data.rows.iter().zip(&v) {
                if *x != 0.0 && *x != 1.0 {
                    return Err(CliError::parse(&data.path, *line, format!("status `{x}` is not 0 or 1")));
                }
            }
            Some(v)
        }
        None => None,
    };

    let mut dataset = Dataset { design, response, status, group_labels: labels, requires: Vec::new() };
    if let Some(path) = args.constraints {
        dataset.requires = read_constraints(path, &dataset)?;
    }
    dataset.constraint_set()?;
    Ok(dataset)
}

/// Rows `child_group,parent_group`; a header line is optional.
fn read_constraints(path: &Path, dataset: &Dataset) -> CliResult<Vec<(usize, usize)>> {
    let table = Table::read(path, false)?;
    let mut out = Vec::new();
    for (k, (line, row)) in table.rows.iter().enumerate() {
        if row.len() != 2 {
            return Err(CliError::parse(path, *line, "expected `child_group,parent_group`"));
        }
        let is_header = k == 0 && row.iter().any(|c| c.parse::<u64>().is_err() && dataset.group_index(c).is_none());
        if is_header {
            continue;
        }
        let lookup = |c: &str| {
            dataset
                .group_index(c)
                .ok_or_else(|| CliError::parse(path, *line, format!("unknown group id `{c}`")))
        };
        out.push((lookup(&row[0])?, lookup(&row[1])?));
    }
    Ok(out)
}

/// Writes `data.csv`, `groups.csv` and, when there are constraints,
/// `constraints.csv`. An added intercept is left out (re-ingest with `--intercept`).
pub fn export(dataset: &Dataset, response: &str, status: Option<&str>, dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let design = &dataset.design;
    let skip = design.intercept_group().map(|g| design.group(g));
    let cols: Vec<usize> = (0..design.p()).filter(|j| !skip.as_ref().is_some_and(|r| r.contains(j))).collect();

    let path = dir.join("data.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    let mut header: Vec<&str> = cols.iter().map(|&j| design.column_names()[j].as_str()).collect();
    header.push(response);
    header.extend(status);
    w.write_record(&header).map_err(|e| csv_error(&path, e))?;
    for i in 0..design.n() {
        let mut rec: Vec<String> = cols.iter().map(|&j| design.values()[(i, j)].to_string()).collect();
        rec.push(dataset.response[i].to_string());
        if let Some(s) = &dataset.status {
            rec.push(s[i].to_string());
        }
        w.write_record(&rec).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let path = dir.join("groups.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    w.write_record(["column", "group"]).map_err(|e| csv_error(&path, e))?;
    for g in 0..design.n_groups() {
        if Some(g) == design.intercept_group() {
            continue;
        }
        for j in design.group(g) {
            w.write_record([design.column_names()[j].as_str(), dataset.group_labels[g].as_str()])
                .map_err(|e| csv_error(&path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    if !dataset.requires.is_empty() {
        let path = dir.join("constraints.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(["child_group", "parent_group"]).map_err(|e| csv_error(&path, e))?;
        for &(c, p) in &dataset.requires {
            w.write_record([&dataset.group_labels[c], &dataset.group_labels[p]]).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn args<'a>(d: &'a Path, g: &'a Path, c: Option<&'a Path>) -> IngestArgs<'a> {
        IngestArgs { data: d, groups: g, constraints: c, response: "y", status: None, intercept: false }
    }

    #[test]
    fn columns_follow_group_order() {
        let dir = tempfile::tempdir().unwrap();
        let d = write(dir.path(), "d.csv", "a,b,y,c\n1,2,0,3\n4,5,1,6\n7,8,1,9.5\n");
        let g = write(dir.path(), "g.csv", "column,group\nc,1\na,7\nb,1\n");
        let ds = ingest(&args(&d, &g, None)).unwrap();
        assert_eq!(ds.design.column_names(), ["c", "b", "a"]);
        assert_eq!(ds.design.group_sizes(), vec![2, 1]);
        assert_eq!(ds.group_labels, ["1", "7"]);
        assert_eq!(ds.design.values()[(2, 0)], 9.5);
        assert_eq!(ds.response, vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn non_numeric_cell_reports_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let d = write(dir.path(), "d.csv", "a,y\n1,0\nx,1\n");
        let g = write(dir.path(), "g.csv", "column,group\na,1\n");
        let err = ingest(&args(&d, &g, None)).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let d = write(dir.path(), "d.csv", "a,y\n1,0\n");
        let g = write(dir.path(), "g.csv", "column,group\nzz,1\n");
        let err = ingest(&args(&d, &g, None)).unwrap_err();
        assert!(matches!(&err, CliError::MissingColumn { name, .. } if name == "zz"));
    }

    #[test]
    fn cycle_is_reported_with_group_ids() {
        let dir = tempfile::tempdir().unwrap();
        let d = write(dir.path(), "d.csv", "a,b,c,y\n1,2,3,0\n2,1,0,1\n");
        let g = write(dir.path(), "g.csv", "column,group\na,10\nb,20\nc,30\n");
        let c = write(dir.path(), "c.csv", "child_group,parent_group\n20,10\n30,20\n10,30\n");
        let err = ingest(&args(&d, &g, Some(&c))).unwrap_err();
        let CliError::Cycle { cycle } = &err else { panic!("{err}") };
        // every consecutive pair is a declared child -> parent edge
        let edges = [("20", "10"), ("30", "20"), ("10", "30")];
        assert!(cycle.len() >= 3);
        for w in cycle.windows(2) {
            assert!(edges.contains(&(w[0].as_str(), w[1].as_str())) || edges.contains(&(w[1].as_str(), w[0].as_str())));
        }
    }

    #[test]
    fn unknown_constraint_group_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let d = write(dir.path(), "d.csv", "a,y\n1,0\n");
        let g = write(dir.path(), "g.csv", "column,group\na,1\n");
        let c = write(dir.path(), "c.csv", "1,4\n");
        assert!(matches!(ingest(&args(&d, &g, Some(&c))), Err(CliError::Parse { line: 1, .. })));
    }

    #[test]
    fn export_then_ingest_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let d = write(
            dir.path(),
            "d.csv",
            "x1,x2,x3,y,s\n0.1,-2.5e-3,3,1.25,1\n0.30000000000000004,7,1e300,2,0\n-0.7,1,2,0.5,1\n",
        );
        let g = write(dir.path(), "g.csv", "column,group\nx1,2\nx2,1\nx3,2\n");
        let c = write(dir.path(), "c.csv", "2,1\n");
        let a = IngestArgs { status: Some("s"), intercept: true, ..args(&d, &g, Some(&c)) };
        let first = ingest(&a).unwrap();
        let out = dir.path().join("out");
        export(&first, "y", Some("s"), &out).unwrap();
        let (d2, g2, c2) = (out.join("data.csv"), out.join("groups.csv"), out.join("constraints.csv"));
        let second = ingest(&IngestArgs { status: Some("s"), intercept: true, ..args(&d2, &g2, Some(&c2)) }).unwrap();
        assert_eq!(first, second);
    }
}
