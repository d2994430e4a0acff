//! Interactive imitation algorithms. Both entry points take only the game's
//! dynamics and the experts as query oracles, so they cannot read rewards.

mod ledger;
mod mail_warm;
mod murmail;

pub use ledger::{QueryLedger, QueryPhase};
pub use mail_warm::{mail_warm, MailWarmConfig, MailWarmOutput, MailWarmSession};
pub use murmail::{
    murmail, murmail_checkpoints, InnerPlanner, IterateChoice, MurmailConfig, MurmailOutput,
};
