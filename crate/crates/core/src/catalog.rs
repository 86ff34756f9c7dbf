//! Sensitive API catalog and name matching.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// Small built-in catalog so the tools run without a user-supplied list.
pub const DESK_CATALOG: [&str; 10] = [
    "android.telephony.TelephonyManager.getDeviceId",
    "android.telephony.SmsManager.sendTextMessage",
    "android.telephony.TelephonyManager.getLine1Number",
    "android.telephony.TelephonyManager.getSubscriberId",
    "android.location.LocationManager.getLastKnownLocation",
    "android.content.pm.PackageManager.getInstalledPackages",
    "android.app.ActivityManager.getRunningTasks",
    "java.lang.Runtime.exec",
    "dalvik.system.DexClassLoader.loadClass",
    "android.net.wifi.WifiManager.getConnectionInfo",
];

/// Ordered list of sensitive API signatures. Entry order fixes the feature
/// dimension order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitiveApiCatalog {
    entries: Vec<String>,
}

impl SensitiveApiCatalog {
    /// Builds a catalog from signatures, trimming whitespace. Duplicates
    /// (after trimming) and blank entries are rejected.
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, e) in entries.into_iter().enumerate() {
            let e = e.as_ref().trim();
            if e.is_empty() {
                continue;
            }
            if !seen.insert(e.to_string()) {
                return Err(Error::DuplicateCatalogEntry {
                    line: i + 1,
                    entry: e.to_string(),
                });
            }
            out.push(e.to_string());
        }
        if out.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        Ok(SensitiveApiCatalog { entries: out })
    }

    /// Parses the plain-text catalog format: one signature per line, `#`
    /// starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let entry = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            }
            .trim();
            if entry.is_empty() {
                continue;
            }
            if !seen.insert(entry) {
                return Err(Error::DuplicateCatalogEntry {
                    line: i + 1,
                    entry: entry.to_string(),
                });
            }
            out.push(entry.to_string());
        }
        if out.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        Ok(SensitiveApiCatalog { entries: out })
    }

    pub fn desk() -> Self {
        Self::new(DESK_CATALOG).expect("built-in catalog is valid")
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Indices of every entry matched by `name`, ascending.
    pub fn matches(&self, name: &str) -> Vec<usize> {
        let name = name.trim();
        if name.is_empty() {
            return Vec::new();
        }
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| name.contains(e.as_str()))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_sensitive(&self, name: &str) -> bool {
        match_sensitive(name, self)
    }
}

/// True iff some catalog entry is a substring of the trimmed name, so
/// descriptor suffixes such as `()Ljava/lang/String;` still match.
pub fn match_sensitive(name: &str, catalog: &SensitiveApiCatalog) -> bool {
    let name = name.trim();
    !name.is_empty() && catalog.entries.iter().any(|e| name.contains(e.as_str()))
}
