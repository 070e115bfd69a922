//! Expansion assembly and audits. (under construction)
