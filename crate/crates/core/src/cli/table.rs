use serde_json::{json, Value};

/// One typed cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// Formats `x` with `digits` significant digits, dropping trailing zeros.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    // Round first so the exponent reflects carries like 9.9999996 → 10.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let rounded: f64 = sci.parse().expect("round-trips");
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let out = trim_zeros(&format!("{:.*}", decimals, rounded)).to_string();
    if out == "-0" {
        "0".into()
    } else {
        out
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl Cell {
    fn render(&self, exact: bool) -> String {
        match self {
            Cell::Num(x) if exact => x.to_string(),
            Cell::Num(x) => format_sig(*x, 6),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self, exact: bool) -> Value {
        match self {
            Cell::Num(x) if !x.is_finite() => Value::String(x.to_string()),
            Cell::Num(x) if exact => json!(x),
            Cell::Num(x) => format_sig(*x, 6)
                .parse::<f64>()
                .map(|v| json!(v))
                .unwrap_or(Value::Null),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// Named columns with rows in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Panics when the row width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn to_csv(&self, exact: bool) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            writer
                .write_record(row.iter().map(|c| c.render(exact)))
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    pub fn to_json(&self, exact: bool) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|c| c.to_json(exact)).collect()))
            .collect();
        json!({ "columns": self.columns, "rows": rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(14.2, 6), "14.2");
        assert_eq!(format_sig(7.28, 6), "7.28");
        assert_eq!(format_sig(0.75 / 0.984375, 6), "0.761905");
        assert_eq!(format_sig(47.5, 6), "47.5");
        assert_eq!(format_sig(9.9999996, 6), "10");
        assert_eq!(format_sig(-0.0, 6), "0");
        assert_eq!(format_sig(1234567.0, 6), "1234570");
        assert_eq!(format_sig(1.5e-7, 6), "1.5e-7");
        assert_eq!(format_sig(-2.0 / 3.0, 6), "-0.666667");
    }

    #[test]
    fn csv_has_header_and_exact_mode() {
        let mut t = ResultTable::new(["a", "b"]);
        t.push(vec![Cell::Num(1.0 / 3.0), "x,y".into()]);
        assert_eq!(t.to_csv(false), "a,b\n0.333333,\"x,y\"\n");
        assert_eq!(t.to_csv(true), "a,b\n0.3333333333333333,\"x,y\"\n");
        assert_eq!(ResultTable::new(["only"]).to_csv(false), "only\n");
    }

    #[test]
    fn json_layout() {
        let mut t = ResultTable::new(["n", "ok"]);
        t.push(vec![2.5.into(), true.into()]);
        assert_eq!(t.to_json(false), json!({"columns": ["n", "ok"], "rows": [[2.5, true]]}));
    }
}
