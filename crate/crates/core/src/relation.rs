//! Immutable dictionary-encoded columnar instances.
//!
//! Each column owns a dictionary of raw strings and a code vector. Codes are
//! assigned in first-occurrence order when an instance is built from raw
//! values; derived instances (projections, selections, joins) share the
//! dictionary of their source column. [`NULL_CODE`] represents the null value
//! and compares equal to itself, so every null cell carries the same constant.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use crate::attrs::{AttrId, AttrSet, MAX_ATTRS};
use crate::error::{Error, Result};

/// Reserved code of the null value.
pub const NULL_CODE: u32 = u32::MAX;

/// A tuple of raw values, `None` standing for null.
pub type ValueTuple = Vec<Option<String>>;

#[derive(Clone, Debug)]
pub struct Column {
    name: String,
    dict: Arc<[String]>,
    codes: Arc<[u32]>,
}

impl Column {
    /// Encodes raw values, assigning codes in first-occurrence order.
    pub fn encode<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        let mut index: HashMap<&str, u32> = HashMap::new();
        let mut dict: Vec<String> = Vec::new();
        let codes = values
            .iter()
            .map(|v| match v {
                None => NULL_CODE,
                Some(s) => {
                    let s = s.as_ref();
                    *index.entry(s).or_insert_with(|| {
                        dict.push(s.to_owned());
                        (dict.len() - 1) as u32
                    })
                }
            })
            .collect::<Vec<_>>();
        Column {
            name: name.into(),
            dict: dict.into(),
            codes: codes.into(),
        }
    }

    pub(crate) fn from_parts(name: String, dict: Arc<[String]>, codes: Vec<u32>) -> Self {
        Column {
            name,
            dict,
            codes: codes.into(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn dictionary(&self) -> &[String] {
        &self.dict
    }

    pub(crate) fn shared_dictionary(&self) -> Arc<[String]> {
        Arc::clone(&self.dict)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn decode(&self, code: u32) -> Option<&str> {
        if code == NULL_CODE {
            None
        } else {
            Some(self.dict[code as usize].as_str())
        }
    }

    pub fn value(&self, row: usize) -> Option<&str> {
        self.decode(self.codes[row])
    }

    /// Number of distinct codes actually present, counting null once.
    pub fn distinct_count(&self) -> usize {
        let mut seen = vec![false; self.dict.len() + 1];
        let mut n = 0;
        for &c in self.codes.iter() {
            let slot = if c == NULL_CODE {
                self.dict.len()
            } else {
                c as usize
            };
            if !seen[slot] {
                seen[slot] = true;
                n += 1;
            }
        }
        n
    }

    /// Code of a raw string in this column's dictionary, if present.
    pub(crate) fn lookup_map(&self) -> HashMap<&str, u32> {
        self.dict
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect()
    }

    fn renamed(&self, name: String) -> Self {
        Column {
            name,
            dict: Arc::clone(&self.dict),
            codes: Arc::clone(&self.codes),
        }
    }

    fn gather(&self, rows: &[usize]) -> Self {
        Column {
            name: self.name.clone(),
            dict: Arc::clone(&self.dict),
            codes: rows.iter().map(|&r| self.codes[r]).collect::<Vec<_>>().into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Raw cell texts read as null.
    pub null_tokens: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: true,
            null_tokens: vec![String::new()],
        }
    }
}

/// An immutable relational instance.
#[derive(Clone, Debug)]
pub struct Instance {
    name: String,
    columns: Vec<Column>,
    rows: usize,
}

impl Instance {
    /// Builds an instance from columns of equal length.
    pub fn new(name: impl Into<String>, columns: Vec<Column>, rows: usize) -> Result<Self> {
        if columns.len() > MAX_ATTRS {
            return Err(Error::SchemaTooWide(columns.len()));
        }
        let mut seen = BTreeSet::new();
        for c in &columns {
            if c.len() != rows {
                return Err(Error::Invariant(format!(
                    "column `{}` has {} cells, expected {rows}",
                    c.name,
                    c.len()
                )));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateAttribute(c.name.clone()));
            }
        }
        Ok(Instance {
            name: name.into(),
            columns,
            rows,
        })
    }

    /// Builds an instance from row-major raw values.
    ///
    /// Attribute names are qualified with `table` unless they already contain
    /// a dot.
    pub fn from_rows<N, S>(table: &str, names: &[N], rows: &[Vec<Option<S>>]) -> Result<Self>
    where
        N: AsRef<str>,
        S: AsRef<str>,
    {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != names.len() {
                return Err(Error::Parse {
                    line: i as u64 + 1,
                    message: format!("expected {} fields, found {}", names.len(), r.len()),
                });
            }
        }
        let columns = names
            .iter()
            .enumerate()
            .map(|(j, n)| {
                let values: Vec<Option<&str>> =
                    rows.iter().map(|r| r[j].as_ref().map(|s| s.as_ref())).collect();
                Column::encode(qualify(table, n.as_ref()), &values)
            })
            .collect();
        Instance::new(table, columns, rows.len())
    }

    /// Convenience constructor for tables without nulls.
    pub fn from_strs(table: &str, names: &[&str], rows: &[&[&str]]) -> Result<Self> {
        let rows: Vec<Vec<Option<&str>>> = rows
            .iter()
            .map(|r| r.iter().map(|s| Some(*s)).collect())
            .collect();
        Instance::from_rows(table, names, &rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn all_attrs(&self) -> AttrSet {
        AttrSet::prefix(self.arity())
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, a: AttrId) -> &Column {
        &self.columns[a.index()]
    }

    pub fn codes(&self, a: AttrId) -> &[u32] {
        self.columns[a.index()].codes()
    }

    pub fn attr_name(&self, a: AttrId) -> &str {
        &self.columns[a.index()].name
    }

    pub fn attr_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn value(&self, row: usize, a: AttrId) -> Option<&str> {
        self.columns[a.index()].value(row)
    }

    /// Resolves an attribute by exact name, or by the unqualified suffix after
    /// the last dot when that suffix is unique.
    pub fn attr(&self, name: &str) -> Result<AttrId> {
        if let Some(i) = self.columns.iter().position(|c| c.name == name) {
            return Ok(AttrId::new(i));
        }
        let mut hits = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| unqualified(&c.name) == name);
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Ok(AttrId::new(i)),
            (Some(_), Some(_)) => Err(Error::AmbiguousAttribute(name.to_owned())),
            _ => Err(Error::UnknownAttribute(name.to_owned())),
        }
    }

    pub fn attrs<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<AttrId>> {
        names.iter().map(|n| self.attr(n.as_ref())).collect()
    }

    pub fn attr_set<S: AsRef<str>>(&self, names: &[S]) -> Result<AttrSet> {
        Ok(self.attrs(names)?.into_iter().collect())
    }

    pub(crate) fn check_attrs(&self, attrs: AttrSet) -> Result<()> {
        match attrs.last() {
            Some(a) if a.index() >= self.arity() => {
                Err(Error::UnknownAttribute(format!("#{}", a.index())))
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn check_list(&self, attrs: &[AttrId]) -> Result<()> {
        self.check_attrs(attrs.iter().collect())
    }

    /// Code tuple of one row over `attrs`.
    pub fn row_key(&self, row: usize, attrs: &[AttrId]) -> Vec<u32> {
        attrs.iter().map(|&a| self.codes(a)[row]).collect()
    }

    /// Raw values of one row over `attrs`.
    pub fn row_values(&self, row: usize, attrs: &[AttrId]) -> ValueTuple {
        attrs
            .iter()
            .map(|&a| self.value(row, a).map(str::to_owned))
            .collect()
    }

    /// Column restriction to `attrs`, keeping every row in order.
    ///
    /// An empty set yields a zero-column instance with the same row count.
    pub fn project(&self, attrs: AttrSet) -> Result<Instance> {
        self.check_attrs(attrs)?;
        Ok(self.project_unchecked(attrs))
    }

    pub(crate) fn project_unchecked(&self, attrs: AttrSet) -> Instance {
        Instance {
            name: self.name.clone(),
            columns: attrs.iter().map(|a| self.column(a).clone()).collect(),
            rows: self.rows,
        }
    }

    /// Deduplicated raw value tuples over `attrs`, in the listed order.
    pub fn distinct_values(&self, attrs: &[AttrId]) -> Result<BTreeSet<ValueTuple>> {
        self.check_list(attrs)?;
        let mut codes = BTreeSet::new();
        for r in 0..self.rows {
            codes.insert(self.row_key(r, attrs));
        }
        Ok(codes
            .into_iter()
            .map(|key| {
                key.iter()
                    .zip(attrs)
                    .map(|(&c, &a)| self.column(a).decode(c).map(str::to_owned))
                    .collect()
            })
            .collect())
    }

    /// Rows whose projection on `attrs` appears in `keep`, in original order.
    pub fn select_by_values(
        &self,
        attrs: &[AttrId],
        keep: &BTreeSet<ValueTuple>,
    ) -> Result<Instance> {
        self.check_list(attrs)?;
        let wanted = self.encode_tuples(attrs, keep);
        let rows: Vec<usize> = (0..self.rows)
            .filter(|&r| wanted.contains(&self.row_key(r, attrs)))
            .collect();
        Ok(self.select_rows(&rows))
    }

    /// Translates raw tuples into this instance's code space, dropping tuples
    /// containing a string absent from a dictionary.
    pub(crate) fn encode_tuples(
        &self,
        attrs: &[AttrId],
        tuples: &BTreeSet<ValueTuple>,
    ) -> std::collections::HashSet<Vec<u32>> {
        let maps: Vec<HashMap<&str, u32>> =
            attrs.iter().map(|&a| self.column(a).lookup_map()).collect();
        tuples
            .iter()
            .filter(|t| t.len() == attrs.len())
            .filter_map(|t| {
                t.iter()
                    .zip(&maps)
                    .map(|(v, m)| match v {
                        None => Some(NULL_CODE),
                        Some(s) => m.get(s.as_str()).copied(),
                    })
                    .collect::<Option<Vec<u32>>>()
            })
            .collect()
    }

    /// The listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Instance {
        Instance {
            name: self.name.clone(),
            columns: self.columns.iter().map(|c| c.gather(rows)).collect(),
            rows: rows.len(),
        }
    }

    /// The same instance with one extra row that is null everywhere.
    pub fn with_null_row(&self) -> Instance {
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let mut codes = c.codes.to_vec();
                codes.push(NULL_CODE);
                Column::from_parts(c.name.clone(), Arc::clone(&c.dict), codes)
            })
            .collect();
        Instance {
            name: self.name.clone(),
            columns,
            rows: self.rows + 1,
        }
    }

    /// Removes duplicate rows, keeping first occurrences in order.
    pub fn dedup_rows(&self) -> Instance {
        let all: Vec<AttrId> = self.all_attrs().iter().collect();
        let mut seen = std::collections::HashSet::new();
        let rows: Vec<usize> = (0..self.rows)
            .filter(|&r| seen.insert(self.row_key(r, &all)))
            .collect();
        if rows.len() == self.rows {
            self.clone()
        } else {
            self.select_rows(&rows)
        }
    }

    /// Renames every attribute.
    pub fn renamed(&self, names: &[String]) -> Result<Instance> {
        if names.len() != self.arity() {
            return Err(Error::Invariant("rename arity mismatch".into()));
        }
        let columns = self
            .columns
            .iter()
            .zip(names)
            .map(|(c, n)| c.renamed(n.clone()))
            .collect();
        Instance::new(self.name.clone(), columns, self.rows)
    }

    /// Row-major raw values.
    pub fn to_rows(&self) -> Vec<ValueTuple> {
        let all: Vec<AttrId> = self.all_attrs().iter().collect();
        (0..self.rows).map(|r| self.row_values(r, &all)).collect()
    }

    /// Serializes as CSV with a header. Nulls are written as the empty string.
    pub fn to_csv_string(&self, delimiter: u8) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::Invariant(format!("csv write failed: {e}"));
        w.write_record(self.attr_names()).map_err(io)?;
        for row in self.to_rows() {
            w.write_record(row.iter().map(|v| v.as_deref().unwrap_or("")))
                .map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Invariant(format!("csv flush failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path, delimiter: u8) -> Result<()> {
        let text = self.to_csv_string(delimiter)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Reads a CSV file; the table name is the file stem.
pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<Instance> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let table = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "T".to_owned());
    parse_csv(&table, &bytes, options)
}

/// Parses CSV bytes into an instance named `table`.
pub fn parse_csv(table: &str, bytes: &[u8], options: &CsvOptions) -> Result<Instance> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut rows: Vec<Vec<Option<String>>> = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                return Err(Error::Parse {
                    line,
                    message: e.to_string(),
                });
            }
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {w} fields, found {}", record.len()),
                });
            }
            _ => {}
        }
        if options.has_header && header.is_none() {
            header = Some(record.iter().map(str::to_owned).collect());
            continue;
        }
        rows.push(
            record
                .iter()
                .map(|cell| {
                    if options.null_tokens.iter().any(|t| t == cell) {
                        None
                    } else {
                        Some(cell.to_owned())
                    }
                })
                .collect(),
        );
    }
    let width = width.ok_or(Error::EmptyInput)?;
    let names = header.unwrap_or_else(|| (0..width).map(|i| format!("A{i}")).collect());
    if names.len() > MAX_ATTRS {
        return Err(Error::SchemaTooWide(names.len()));
    }
    Instance::from_rows(table, &names, &rows)
}

fn qualify(table: &str, name: &str) -> String {
    if name.contains('.') || table.is_empty() {
        name.to_owned()
    } else {
        format!("{table}.{name}")
    }
}

pub(crate) fn unqualified(name: &str) -> &str {
    name.rsplit_once('.').map_or(name, |(_, n)| n)
}
