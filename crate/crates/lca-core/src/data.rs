//! Response storage and delimited-text ingestion.
//!
//! Data files carry a header row of indicator names (a superset of the
//! schema is fine; extra columns are ignored), then one row per respondent.
//! Cells hold 1-based integer codes or outcome labels; an empty cell means
//! missing. Codes are stored 0-based internally.

use crate::error::{LcaError, Result};
use crate::schema::SurveySchema;
use std::io::BufRead;
use std::sync::Arc;

/// Sentinel for a missing cell in the internal code array.
const MISSING: u16 = u16::MAX;

/// n x J matrix of categorical responses tied to a schema.
///
/// Immutable after construction; share via `Arc` or `clone`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    schema: Arc<SurveySchema>,
    n_rows: usize,
    /// Row-major, 0-based codes, `MISSING` for absent cells.
    cells: Vec<u16>,
}

impl ResponseMatrix {
    /// Build from 0-based codes (`None` = missing), validating ranges.
    pub fn from_codes(
        schema: Arc<SurveySchema>,
        rows: &[Vec<Option<usize>>],
    ) -> Result<Self> {
        let j = schema.n_indicators();
        let mut cells = Vec::with_capacity(rows.len() * j);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != j {
                return Err(LcaError::InvalidInput(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    j
                )));
            }
            for (col, cell) in row.iter().enumerate() {
                match cell {
                    None => cells.push(MISSING),
                    Some(code) => {
                        let k = schema.indicators[col].n_categories();
                        if *code >= k {
                            return Err(LcaError::ParseCell {
                                row: i + 1,
                                column: schema.indicators[col].name.clone(),
                                message: format!("code {} outside 1..={}", code + 1, k),
                            });
                        }
                        cells.push(*code as u16);
                    }
                }
            }
        }
        Ok(Self { schema, n_rows: rows.len(), cells })
    }

    pub fn schema(&self) -> &Arc<SurveySchema> {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_indicators(&self) -> usize {
        self.schema.n_indicators()
    }

    /// 0-based code at (row, indicator), `None` if missing.
    pub fn code(&self, row: usize, indicator: usize) -> Option<usize> {
        let c = self.cells[row * self.n_indicators() + indicator];
        (c != MISSING).then_some(c as usize)
    }

    /// Raw row slice; complete rows contain no `u16::MAX` sentinel.
    pub(crate) fn raw_row(&self, row: usize) -> &[u16] {
        let j = self.n_indicators();
        &self.cells[row * j..(row + 1) * j]
    }

    pub fn row_is_complete(&self, row: usize) -> bool {
        self.raw_row(row).iter().all(|&c| c != MISSING)
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|&c| c != MISSING)
    }

    /// Error naming the first missing cell, for ops that need complete data.
    pub(crate) fn require_complete(&self) -> Result<()> {
        let j = self.n_indicators();
        match self.cells.iter().position(|&c| c == MISSING) {
            None => Ok(()),
            Some(pos) => Err(LcaError::IncompleteData {
                row: pos / j + 1,
                column: self.schema.indicators[pos % j].name.clone(),
            }),
        }
    }

    /// Complete row as 0-based codes; panics on missing cells.
    pub fn complete_row(&self, row: usize) -> Vec<usize> {
        self.raw_row(row)
            .iter()
            .map(|&c| {
                assert!(c != MISSING, "row {} is not complete", row + 1);
                c as usize
            })
            .collect()
    }
}

/// Parse a delimited stream into a `ResponseMatrix`.
///
/// The header must name every schema indicator; columns are matched by
/// name, order-independently. Cells may be 1-based integer codes or
/// outcome labels from the schema; empty cells are missing.
pub fn load_responses(
    reader: impl BufRead,
    schema: Arc<SurveySchema>,
    delimiter: char,
) -> Result<ResponseMatrix> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(LcaError::InvalidInput("missing header row".into())),
    };
    let columns: Vec<&str> = split_row(&header, delimiter);

    // schema indicator j -> file column index
    let mut column_of = Vec::with_capacity(schema.n_indicators());
    for ind in &schema.indicators {
        match columns.iter().position(|c| *c == ind.name) {
            Some(pos) => column_of.push(pos),
            None => {
                return Err(LcaError::InvalidInput(format!(
                    "header is missing schema indicator '{}'",
                    ind.name
                )))
            }
        }
    }

    let j = schema.n_indicators();
    let mut cells: Vec<u16> = Vec::new();
    let mut n_rows = 0usize;
    for (line_idx, line) in lines.enumerate() {
        let line = line?;
        // a blank line is never a record
        if line.trim_end_matches('\r').is_empty() {
            continue;
        }
        let fields = split_row(&line, delimiter);
        if fields.len() != columns.len() {
            return Err(LcaError::InvalidInput(format!(
                "row {} has {} cells, expected {}",
                line_idx + 1,
                fields.len(),
                columns.len()
            )));
        }
        n_rows += 1;
        for (ind_idx, &col) in column_of.iter().enumerate() {
            let raw = fields[col].trim();
            let ind = &schema.indicators[ind_idx];
            if raw.is_empty() {
                cells.push(MISSING);
                continue;
            }
            let code = if let Ok(num) = raw.parse::<i64>() {
                if num < 1 || num as usize > ind.n_categories() {
                    return Err(LcaError::ParseCell {
                        row: line_idx + 1,
                        column: ind.name.clone(),
                        message: format!("code {} outside 1..={}", num, ind.n_categories()),
                    });
                }
                (num - 1) as usize
            } else {
                match ind.outcomes.iter().position(|label| label.trim() == raw) {
                    Some(pos) => pos,
                    None => {
                        return Err(LcaError::ParseCell {
                            row: line_idx + 1,
                            column: ind.name.clone(),
                            message: format!("unknown category label '{}'", raw),
                        })
                    }
                }
            };
            cells.push(code as u16);
        }
    }
    if n_rows == 0 {
        return Err(LcaError::EmptyDataset);
    }
    Ok(ResponseMatrix { schema, n_rows, cells })
}

fn split_row(line: &str, delimiter: char) -> Vec<&str> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    line.split(delimiter).map(str::trim).collect()
}

/// Render a matrix back to delimited text with 1-based integer codes.
/// Inverse of `load_responses` for complete matrices.
pub fn write_responses(matrix: &ResponseMatrix, delimiter: char) -> String {
    let schema = matrix.schema();
    let mut out = String::new();
    let names: Vec<&str> = schema.indicators.iter().map(|i| i.name.as_str()).collect();
    out.push_str(&names.join(&delimiter.to_string()));
    out.push('\n');
    for i in 0..matrix.n_rows() {
        let row: Vec<String> = (0..matrix.n_indicators())
            .map(|j| match matrix.code(i, j) {
                Some(code) => (code + 1).to_string(),
                None => String::new(),
            })
            .collect();
        out.push_str(&row.join(&delimiter.to_string()));
        out.push('\n');
    }
    out
}

/// Listwise deletion: keep exactly the rows with no missing cell.
pub fn drop_incomplete(matrix: &ResponseMatrix) -> Result<ResponseMatrix> {
    let mut cells = Vec::new();
    let mut n_rows = 0usize;
    for i in 0..matrix.n_rows() {
        if matrix.row_is_complete(i) {
            cells.extend_from_slice(matrix.raw_row(i));
            n_rows += 1;
        }
    }
    if n_rows == 0 {
        return Err(LcaError::NoCompleteCases);
    }
    Ok(ResponseMatrix { schema: Arc::clone(matrix.schema()), n_rows, cells })
}

/// Per-indicator relative outcome frequencies; each vector sums to 1.
pub fn tabulate(matrix: &ResponseMatrix) -> Result<Vec<Vec<f64>>> {
    matrix.require_complete()?;
    let n = matrix.n_rows() as f64;
    let mut tables: Vec<Vec<f64>> = matrix
        .schema()
        .category_counts()
        .iter()
        .map(|&k| vec![0.0; k])
        .collect();
    for i in 0..matrix.n_rows() {
        for (j, &code) in matrix.raw_row(i).iter().enumerate() {
            tables[j][code as usize] += 1.0;
        }
    }
    for table in &mut tables {
        for v in table.iter_mut() {
            *v /= n;
        }
    }
    Ok(tables)
}
