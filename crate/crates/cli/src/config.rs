//! `key = value` config files and flag > file > default resolution.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashSet};
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{data, usage, CliResult};

#[derive(Debug, Default)]
pub struct Settings {
    entries: BTreeMap<String, (String, usize)>,
    used: RefCell<HashSet<String>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Settings {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| usage(format!("config line {line_no}: expected `key = value`")))?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(usage(format!("config line {line_no}: empty key")));
            }
            if entries.insert(key.clone(), (value.trim().to_string(), line_no)).is_some() {
                return Err(usage(format!("config line {line_no}: duplicate key `{key}`")));
            }
        }
        Ok(Self { entries, used: RefCell::default() })
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text =
                    fs::read_to_string(p).map_err(|e| data(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    /// Flag value if given, else the config entry, else `None`.
    pub fn opt<T>(&self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let key = normalize(key);
        self.used.borrow_mut().insert(key.clone());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(&key) {
            None => Ok(None),
            Some((value, line)) => value
                .parse()
                .map(Some)
                .map_err(|e| usage(format!("config line {line}: invalid value for `{key}`: {e}"))),
        }
    }

    pub fn get<T>(&self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.opt(key, flag)?.unwrap_or(default))
    }

    /// Fails on config keys the subcommand never asked for.
    pub fn finish(&self) -> CliResult<()> {
        let used = self.used.borrow();
        match self.entries.iter().find(|(k, _)| !used.contains(*k)) {
            Some((key, (_, line))) => Err(usage(format!("config line {line}: unknown key `{key}`"))),
            None => Ok(()),
        }
    }
}

/// Comma-separated values, e.g. `410,1010,55`.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().is_empty() {
            return Ok(List(Vec::new()));
        }
        s.split(',')
            .map(|part| part.trim().parse::<T>().map_err(|e| format!("{:?}: {e}", part.trim())))
            .collect::<Result<Vec<T>, String>>()
            .map(List)
    }
}

impl<T> List<T> {
    pub fn exactly<const N: usize>(self, what: &str) -> CliResult<[T; N]> {
        let got = self.0.len();
        self.0.try_into().map_err(|_| usage(format!("{what} needs {N} comma-separated values, got {got}")))
    }
}
