//! Company records and the view of them the analyses need.

use serde::{Deserialize, Serialize};

use crate::geo::{Cbsa, Csa, Zip3};
use crate::taxonomy::{NaceCode, SectorFlags, SizeClass};

/// A cleaned company with geography, technology, and size attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompanyRecord {
    pub id: String,
    pub zip3: Zip3,
    pub state: String,
    pub cbsa: Option<Cbsa>,
    pub csa: Option<Csa>,
    pub nace: NaceCode,
    pub sectors: SectorFlags,
    pub size: SizeClass,
    pub employees: u64,
    pub year: Option<i32>,
    pub city: Option<String>,
}

/// One row of the cleaned-sample file: just the fields analyses use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub zip3: Zip3,
    pub state: String,
    pub cbsa_code: Option<String>,
    pub csa_code: Option<String>,
    pub nace3: String,
    pub size_class: SizeClass,
    pub sectors: SectorFlags,
}

impl From<&CompanyRecord> for SampleRecord {
    fn from(r: &CompanyRecord) -> Self {
        SampleRecord {
            id: r.id.clone(),
            zip3: r.zip3.clone(),
            state: r.state.clone(),
            cbsa_code: r.cbsa.as_ref().map(|c| c.code.clone()),
            csa_code: r.csa.as_ref().map(|c| c.code.clone()),
            nace3: r.nace.as_str().to_owned(),
            size_class: r.size,
            sectors: r.sectors,
        }
    }
}

/// Fields read by the decomposition routines. Implemented for both record
/// types so analyses run straight off ingestion or off a cleaned-sample file.
pub trait AnalysisRecord {
    fn zip3(&self) -> &str;
    fn nace3(&self) -> &str;
    fn size_class(&self) -> SizeClass;
    fn sectors(&self) -> SectorFlags;
    fn state(&self) -> &str;
    fn cbsa_code(&self) -> Option<&str>;
    fn csa_code(&self) -> Option<&str>;
}

impl AnalysisRecord for CompanyRecord {
    fn zip3(&self) -> &str {
        self.zip3.as_str()
    }
    fn nace3(&self) -> &str {
        self.nace.as_str()
    }
    fn size_class(&self) -> SizeClass {
        self.size
    }
    fn sectors(&self) -> SectorFlags {
        self.sectors
    }
    fn state(&self) -> &str {
        &self.state
    }
    fn cbsa_code(&self) -> Option<&str> {
        self.cbsa.as_ref().map(|c| c.code.as_str())
    }
    fn csa_code(&self) -> Option<&str> {
        self.csa.as_ref().map(|c| c.code.as_str())
    }
}

impl AnalysisRecord for SampleRecord {
    fn zip3(&self) -> &str {
        self.zip3.as_str()
    }
    fn nace3(&self) -> &str {
        &self.nace3
    }
    fn size_class(&self) -> SizeClass {
        self.size_class
    }
    fn sectors(&self) -> SectorFlags {
        self.sectors
    }
    fn state(&self) -> &str {
        &self.state
    }
    fn cbsa_code(&self) -> Option<&str> {
        self.cbsa_code.as_deref()
    }
    fn csa_code(&self) -> Option<&str> {
        self.csa_code.as_deref()
    }
}

impl<T: AnalysisRecord + ?Sized> AnalysisRecord for &T {
    fn zip3(&self) -> &str {
        (**self).zip3()
    }
    fn nace3(&self) -> &str {
        (**self).nace3()
    }
    fn size_class(&self) -> SizeClass {
        (**self).size_class()
    }
    fn sectors(&self) -> SectorFlags {
        (**self).sectors()
    }
    fn state(&self) -> &str {
        (**self).state()
    }
    fn cbsa_code(&self) -> Option<&str> {
        (**self).cbsa_code()
    }
    fn csa_code(&self) -> Option<&str> {
        (**self).csa_code()
    }
}
