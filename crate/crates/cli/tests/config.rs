use clap::Parser;
use personable_cli::{Cli, Command};

// The only test in this binary, so setting the environment cannot race.
#[test]
fn flags_win_over_environment_which_wins_over_defaults() {
    std::env::set_var("PERSONABLE_PORT", "9100");
    std::env::set_var("PERSONABLE_TOP_K", "3");
    std::env::set_var("PERSONABLE_DATA_DIR", "/tmp/from-env");

    let Command::Serve(args) = Cli::try_parse_from(["personable", "serve"]).unwrap().command else {
        panic!("expected serve");
    };
    assert_eq!(args.port, 9100);
    assert_eq!(args.top_k, 3);
    assert_eq!(args.data_dir.to_str(), Some("/tmp/from-env"));
    assert_eq!(args.remember_threshold, 1);

    let Command::Serve(args) = Cli::try_parse_from(["personable", "serve", "--port", "7000", "--top-k", "9"])
        .unwrap()
        .command
    else {
        panic!("expected serve");
    };
    assert_eq!(args.port, 7000);
    assert_eq!(args.top_k, 9);
    let config = args.config();
    assert_eq!(config.top_k, 9);
    assert_eq!(config.data_dir.to_str(), Some("/tmp/from-env"));
}
