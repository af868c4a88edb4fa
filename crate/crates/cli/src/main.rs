// SPDX-License-Identifier: Apache-2.0

use wscr_cli::HttpTransport;

fn main() {
    let code = wscr_cli::run(
        std::env::args_os(),
        HttpTransport::default(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    std::process::exit(code);
}
