//! Preprocessing: categorical columns become indicator groups, spline columns
//! become a linear group plus a deviation-from-linearity group.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::Args;

use ala_core::sim::spline_deviation_basis;

use crate::error::{CliError, CliResult};
use crate::ingest::Table;
use crate::output::write_csv;

#[derive(Args, Clone, Debug)]
pub struct ExpandArgs {
    /// Input data file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for data.csv, groups.csv and constraints.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Columns copied unchanged and left out of groups.csv (response, status).
    #[arg(long, value_delimiter = ',')]
    pub keep: Vec<String>,
    /// Columns left out entirely.
    #[arg(long, value_delimiter = ',')]
    pub drop: Vec<String>,
    /// Columns coded as indicators of every level but the first (in sort order).
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    /// Columns given a linear group and a spline deviation group that requires it.
    #[arg(long, value_delimiter = ',')]
    pub spline: Vec<String>,
    /// Columns in each spline deviation group.
    #[arg(long, default_value_t = 5)]
    pub spline_dim: usize,
}

struct Output {
    names: Vec<String>,
    columns: Vec<Vec<String>>,
    groups: Vec<(String, u64)>,
    constraints: Vec<(u64, u64)>,
    next_group: u64,
}

impl Output {
    fn push_group(&mut self, cols: Vec<(String, Vec<String>)>) -> u64 {
        let id = self.next_group;
        self.next_group += 1;
        for (name, values) in cols {
            self.groups.push((name.clone(), id));
            self.names.push(name);
            self.columns.push(values);
        }
        id
    }
}

pub fn run(args: &ExpandArgs) -> CliResult<()> {
    let table = Table::read(&args.data, true)?;
    for name in args.keep.iter().chain(&args.drop).chain(&args.categorical).chain(&args.spline) {
        table.index_of(name)?;
    }
    let n = table.rows.len();
    let mut out = Output { names: Vec::new(), columns: Vec::new(), groups: Vec::new(), constraints: Vec::new(), next_group: 1 };
    let mut kept = Vec::new();

    for (col, name) in table.headers.iter().enumerate() {
        let raw: Vec<String> = table.rows.iter().map(|(_, r)| r[col].clone()).collect();
        if args.drop.contains(name) {
            continue;
        }
        if args.keep.contains(name) {
            kept.push((name.clone(), raw));
        } else if args.categorical.contains(name) {
            let levels: BTreeSet<&str> = raw.iter().map(String::as_str).collect();
            let levels: Vec<&str> = levels.into_iter().collect();
            if levels.len() < 2 {
                return Err(CliError::Config(format!("categorical column `{name}` has a single level")));
            }
            let cols = levels[1..]
                .iter()
                .map(|lv| {
                    let ind = raw.iter().map(|v| if v == lv { "1" } else { "0" }.to_string()).collect();
                    (format!("{name}={lv}"), ind)
                })
                .collect();
            out.push_group(cols);
        } else if args.spline.contains(name) {
            let x = table.numeric(col)?;
            let basis = spline_deviation_basis(&x, args.spline_dim)?;
            let linear = out.push_group(vec![(name.clone(), x.iter().map(f64::to_string).collect())]);
            let cols = (0..args.spline_dim)
                .map(|k| (format!("{name}_s{}", k + 1), (0..n).map(|i| basis[(i, k)].to_string()).collect()))
                .collect();
            let dev = out.push_group(cols);
            out.constraints.push((dev, linear));
        } else {
            let x = table.numeric(col)?;
            out.push_group(vec![(name.clone(), x.iter().map(f64::to_string).collect())]);
        }
    }

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let header: Vec<&str> = out.names.iter().chain(kept.iter().map(|(k, _)| k)).map(String::as_str).collect();
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| out.columns.iter().chain(kept.iter().map(|(_, v)| v)).map(|c| c[i].clone()).collect())
        .collect();
    write_csv(&args.out.join("data.csv"), &header, &rows)?;
    let groups: Vec<Vec<String>> = out.groups.iter().map(|(c, g)| vec![c.clone(), g.to_string()]).collect();
    write_csv(&args.out.join("groups.csv"), &["column", "group"], &groups)?;
    if !out.constraints.is_empty() {
        let rows: Vec<Vec<String>> = out.constraints.iter().map(|(c, p)| vec![c.to_string(), p.to_string()]).collect();
        write_csv(&args.out.join("constraints.csv"), &["child_group", "parent_group"], &rows)?;
    }
    Ok(())
}
