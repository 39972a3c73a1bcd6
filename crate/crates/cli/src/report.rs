use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::PipelineError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Warning(String),
    Error(String),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Warning(_) => "warning",
            Status::Error(_) => "error",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Status::Ok => "",
            Status::Warning(m) | Status::Error(m) => m,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Warning(_) => 1,
            Status::Error(_) => 2,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => f.write_str("ok"),
            other => write!(f, "{}: {}", other.label(), other.message()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: String,
    pub status: Status,
    /// Extra `(column, value)` pairs specific to the stage.
    pub fields: Vec<(&'static str, String)>,
}

impl Outcome {
    pub fn new(id: impl Into<String>, status: Status) -> Self {
        Self {
            id: id.into(),
            status,
            fields: Vec::new(),
        }
    }
}

/// Per-record results of one stage, ordered by id.
#[derive(Clone, Debug, PartialEq)]
pub struct StageReport {
    pub stage: &'static str,
    pub outcomes: Vec<Outcome>,
}

impl StageReport {
    pub fn new(stage: &'static str, mut outcomes: Vec<Outcome>) -> Self {
        outcomes.sort_by(|a, b| a.id.cmp(&b.id));
        Self { stage, outcomes }
    }

    /// 0 when every record is ok, 1 when the worst is a warning, 2 on any error.
    pub fn exit_code(&self) -> u8 {
        self.outcomes.iter().map(|o| o.status.rank()).max().unwrap_or(0)
    }

    pub fn count(&self, label: &str) -> usize {
        self.outcomes.iter().filter(|o| o.status.label() == label).count()
    }

    pub fn get(&self, id: &str) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.id == id)
    }

    pub fn to_csv(&self) -> String {
        let mut columns: Vec<&str> = Vec::new();
        for o in &self.outcomes {
            for (c, _) in &o.fields {
                if !columns.contains(c) {
                    columns.push(c);
                }
            }
        }
        let mut out = String::from("id,status,message");
        for c in &columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for o in &self.outcomes {
            out.push_str(&format!("{},{},{}", o.id, o.status.label(), csv_field(o.status.message())));
            for c in &columns {
                let value = o.fields.iter().find(|(k, _)| k == c).map(|(_, v)| v.as_str()).unwrap_or("");
                out.push(',');
                out.push_str(&csv_field(value));
            }
            out.push('\n');
        }
        out
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} ok, {} warning, {} error",
            self.stage,
            self.count("ok"),
            self.count("warning"),
            self.count("error")
        )
    }

    pub fn write(&self, dir: &Path) -> Result<(), PipelineError> {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir.to_path_buf(), e))?;
        let path = dir.join(format!("{}.csv", self.stage));
        fs::write(&path, self.to_csv()).map_err(|e| PipelineError::io(path, e))
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_is_worst_status() {
        let mut r = StageReport::new("x", vec![Outcome::new("b", Status::Ok), Outcome::new("a", Status::Ok)]);
        assert_eq!(r.exit_code(), 0);
        assert_eq!(r.outcomes[0].id, "a");
        r.outcomes.push(Outcome::new("c", Status::Warning("w".into())));
        assert_eq!(r.exit_code(), 1);
        r.outcomes.push(Outcome::new("d", Status::Error("e".into())));
        assert_eq!(r.exit_code(), 2);
        assert_eq!(StageReport::new("empty", vec![]).exit_code(), 0);
    }

    #[test]
    fn csv_quotes_and_columns() {
        let mut o = Outcome::new("a", Status::Error("bad, very".into()));
        o.fields.push(("loss", "0.5".into()));
        let r = StageReport::new("warp", vec![o, Outcome::new("b", Status::Ok)]);
        assert_eq!(r.to_csv(), "id,status,message,loss\na,error,\"bad, very\",0.5\nb,ok,,\n");
    }
}
