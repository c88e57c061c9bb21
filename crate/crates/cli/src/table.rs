//! CSV tables and dataset ingestion.
//!
//! Numbers are written with six significant digits (integral values such as
//! counts and unit indices are written exactly), so parsing an emitted file
//! gives back the table with each number rounded once.

use std::path::Path;

use gpn_core::Dataset;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// Six significant digits, shortest representation that parses back to the
/// rounded value.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v.fract() == 0.0 && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    let rounded: f64 = format!("{v:.5e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn parse(field: &str) -> Cell {
        if field.is_empty() {
            Cell::Empty
        } else if let Ok(v) = field.parse::<f64>() {
            Cell::Num(v)
        } else {
            Cell::Text(field.to_string())
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

/// A header plus rows of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cell of `row` under column `name`.
    pub fn get(&self, row: usize, name: &str) -> Option<&Cell> {
        self.rows.get(row)?.get(self.column(name)?)
    }

    /// Every number replaced by its serialised value.
    pub fn rounded(&self) -> Table {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|c| Cell::parse(&c.render())).collect())
            .collect();
        Table { header: self.header.clone(), rows }
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("writing to memory");
        }
        w.into_inner().expect("flushing to memory")
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Table> {
        let mut r = csv::Reader::from_reader(bytes);
        let header = r
            .headers()
            .map_err(|e| CliError::Data(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = r
            .records()
            .map(|rec| {
                rec.map(|rec| rec.iter().map(Cell::parse).collect())
                    .map_err(|e| CliError::Data(e.to_string()))
            })
            .collect::<Result<_>>()?;
        Ok(Table { header, rows })
    }
}

/// Read a dataset whose header is `y,z` followed by covariate columns. Every
/// column after `z` is a covariate.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_dataset(file, &path.display().to_string())
}

pub fn parse_dataset<R: std::io::Read>(input: R, name: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("{name}: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 || header[0] != "y" || header[1] != "z" {
        return Err(CliError::Data(format!(
            "{name}: header must start with `y,z`, found `{}`",
            header.join(",")
        )));
    }
    let d = header.len() - 2;
    let (mut x, mut z, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Data(format!("{name}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |col: usize| -> Result<f64> {
            let field = &rec[col];
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::Data(format!(
                        "{name}: row {line}, column {} (`{}`): `{field}` is not a finite number",
                        col + 1,
                        header[col]
                    ))
                })
        };
        y.push(num(0)?);
        let t = num(1)?;
        if t != 0.0 && t != 1.0 {
            return Err(CliError::Data(format!(
                "{name}: row {line}, column 2 (`z`): treatment must be 0 or 1, found `{}`",
                &rec[1]
            )));
        }
        z.push(t as u8);
        for col in 2..header.len() {
            x.push(num(col)?);
        }
    }
    if y.is_empty() {
        return Err(CliError::Data(format!("{name}: no data rows")));
    }
    let data = Dataset::from_flat(x, d, z, y).map_err(|e| CliError::Data(format!("{name}: {e}")))?;
    let treated = data.treated();
    if treated == 0 || treated == data.n() {
        return Err(CliError::Data(format!(
            "{name}: degenerate treatment, all {} rows have z = {}",
            data.n(),
            data.z()[0]
        )));
    }
    Ok(data)
}
