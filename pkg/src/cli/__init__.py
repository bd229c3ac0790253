from src.cli.commands import COMMANDS, build_parser, exit_code_for, flag_overrides, run_cli, run_job
from src.cli.output import render_csv, save_table
