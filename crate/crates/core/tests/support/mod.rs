pub mod hp;
pub mod oracle;
