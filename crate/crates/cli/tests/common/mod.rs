#![allow(dead_code)]

use std::collections::HashMap;
use std::process::{Command, Output};

pub fn sfsph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfsph"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Parsed CSV output: metadata entries and the data table.
pub struct Csv {
    pub meta: HashMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn parse(text: &str) -> Self {
        let mut meta = HashMap::new();
        let mut lines = text.lines().peekable();
        while let Some(line) = lines.next_if(|l| l.starts_with('#')) {
            let (k, v) = line[2..].split_once('=').expect("metadata is key=value");
            meta.insert(k.to_string(), v.to_string());
        }
        let columns = lines.next().expect("header").split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Self { meta, columns, rows }
    }

    pub fn column(&self, name: &str) -> usize {
        self.columns
            .iter()
            .position(|c| c == name)
            .unwrap_or_else(|| panic!("no column {name}"))
    }

    pub fn floats(&self, name: &str) -> Vec<f64> {
        let j = self.column(name);
        self.rows.iter().map(|r| r[j].parse().expect("numeric cell")).collect()
    }

    pub fn meta_float(&self, key: &str) -> f64 {
        self.meta[key].parse().expect("numeric metadata")
    }

    pub fn meta_list(&self, key: &str) -> Vec<String> {
        let v = &self.meta[key];
        if v.is_empty() {
            Vec::new()
        } else {
            v.split(';').map(String::from).collect()
        }
    }
}

/// Runs the binary, asserts success and parses stdout.
pub fn run_csv(args: &[&str]) -> Csv {
    let out = sfsph(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    Csv::parse(&String::from_utf8(out.stdout).expect("utf-8 output"))
}
