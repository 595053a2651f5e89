"""
Command entry points behind `mmwkit run`, `mmwkit validate` and `mmwkit presets list`.
"""

import logging
from typing import Optional

from rich.console import Console
from rich.table import Table

from ..errors import EXIT_OK, EXIT_VALIDATION, exit_code_for
from .config import ExperimentConfig, list_presets, validate_config
from .runner import run_experiment

console = Console()


def run_main(config_file: str, seed: Optional[int] = None, out_dir: str = ".",
             threads: Optional[int] = None, json_format: bool = False,
             verbose: bool = False) -> int:
    """
    Run one experiment config and write its artifacts.

    Args:
        config_file: Path to the YAML experiment
        seed: Overrides the config seed
        out_dir: Output directory for artifacts and manifest.json
        threads: Overrides the config thread count
        json_format: Also write JSON mirrors of every CSV
        verbose: Print progress and the run summary

    Returns:
        Exit code: 0 ok, 1 validation, 2 numerical, 3 I/O
    """
    try:
        if verbose:
            console.print(f"[bold blue]Loading experiment {config_file}...[/]")
        config = ExperimentConfig.load(config_file)
        if verbose:
            console.print(f"[green]Running {config.kind} experiment '{config.output}'[/]")
        manifest = run_experiment(config, out_dir, seed=seed, threads=threads,
                                  json_mirror=True if json_format else None)
        if verbose:
            console.print(f"[green]Finished in {manifest.duration_s:.2f} s[/]")
            for name in manifest.files:
                console.print(f"  {name}")
            for key, value in manifest.summary.items():
                console.print(f"  {key}: {value}")
            console.print("[bold green]Processing complete![/]")
    except Exception as e:
        logging.error(f"Error running experiment: {str(e)}")
        if verbose:
            console.print(f"[bold red]Error:[/] {str(e)}")
        return exit_code_for(e)
    return EXIT_OK


def validate_main(config_file: str, verbose: bool = False) -> int:
    """Report every violation of a config file; exit 0 only when it is valid."""
    try:
        report = validate_config(config_file)
    except Exception as e:
        logging.error(f"Error reading config: {str(e)}")
        console.print(f"[bold red]Error:[/] {str(e)}")
        return exit_code_for(e)
    if report.valid:
        console.print(f"[green]{config_file}: valid[/]")
        return EXIT_OK
    console.print(f"[bold red]{config_file}: {len(report.violations)} violation(s)[/]")
    for locator, message in report.violations:
        console.print(f"  {locator}: {message}")
    return EXIT_VALIDATION


def presets_main(verbose: bool = False) -> int:
    """Print the packaged presets."""
    table = Table(title="Packaged presets")
    table.add_column("Name", style="cyan")
    table.add_column("Kind")
    table.add_column("Description")
    for name, kind, description in list_presets():
        table.add_row(name, kind or "(include)", description)
    console.print(table)
    return EXIT_OK
