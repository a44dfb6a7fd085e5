use std::path::PathBuf;

use clap::{Args, ValueEnum};

use viewfuse_core::corpus::save_corpus;
use viewfuse_core::synthetic::{synthetic_corpus, SyntheticSpec};

#[derive(Clone, Copy, ValueEnum)]
pub enum Profile {
    /// Label signal in all four views
    Planted,
    /// Label signal only in the mention network
    Network,
    /// No planted signal
    Plain,
}

#[derive(Args)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 60)]
    pub users: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Profile::Planted)]
    pub profile: Profile,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: SyntheticArgs) -> anyhow::Result<()> {
    let (text_signal, network_signal) = match args.profile {
        Profile::Planted => (true, true),
        Profile::Network => (false, true),
        Profile::Plain => (false, false),
    };
    let corpus = synthetic_corpus(&SyntheticSpec {
        users: args.users,
        seed: args.seed,
        text_signal,
        network_signal,
    });
    save_corpus(&corpus, &args.out)?;
    println!("{} users -> {}", corpus.len(), args.out.display());
    Ok(())
}
