//! Small report/connection toy library used as a mutation-testing subject.

pub fn add(a: i64, b: i64) -> i64 {
    a + b
}

pub fn is_even(n: i64) -> bool {
    n % 2 == 0
}

pub fn greeting(name: &str) -> String {
    format!("Hello, {name}!")
}

pub fn ratio(done: usize, total: usize) -> f64 {
    done as f64 / total as f64
}

pub fn grade(score: u32) -> char {
    if score >= 90 {
        'A'
    } else {
        'B'
    }
}

fn pad(cell: &str) -> String {
    cell.trim().to_string()
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new() -> Table {
        Table {
            header: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn set_header(&mut self, cols: &[&str]) {
        self.header = cols.iter().map(|c| c.to_string()).collect();
    }

    pub fn add_row(&mut self, cells: &[&str]) {
        let row = cells.iter().map(|c| pad(c)).collect();
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.header.is_empty() {
            out.push_str(&self.header.join("|"));
            out.push('\n');
        }
        for row in &self.rows {
            out.push_str(&row.join("|"));
            out.push('\n');
        }
        out
    }
}

#[derive(Default)]
pub struct Pool {
    open: usize,
}

impl Pool {
    pub fn connect(&mut self) {
        self.open += 1;
    }

    pub fn disconnect(&mut self) {
        if self.open > 0 {
            self.open -= 1;
        }
    }

    pub(crate) fn session_count(&self) -> usize {
        self.open
    }
}

pub trait Validate {
    fn is_valid(&self) -> bool;
}

impl Validate for Pool {
    fn is_valid(&self) -> bool {
        self.open < 100
    }
}

#[derive(Default)]
pub struct Audit {
    entries: Vec<String>,
}

impl Audit {
    pub fn log(&mut self, msg: &str) {
        self.entries.push(msg.to_string());
    }

    pub fn tag(&mut self, label: &str) -> usize {
        self.entries.push(format!("tag:{label}"));
        self.entries.len()
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }
}
