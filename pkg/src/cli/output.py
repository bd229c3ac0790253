import json
import os

from src import __version__

FLOAT_FORMAT = "%.17g"


def render_csv(frame, config):
    """
    CSV text of a table, preceded by comment lines carrying the version and the full configuration.

    Args:
        frame (pd.DataFrame): Table to render.
        config (dict): Merged configuration of the job.

    Returns:
        str: The document; equal inputs give identical text.
    """
    header = f"# blowup-rates {__version__}\n# config: {json.dumps(config, sort_keys=True)}\n"
    return header + frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def save_table(frame, directory, name, config):
    """
    Writes a table to <directory>/<name>.csv.

    Returns:
        str: The file name.
    """
    os.makedirs(directory, exist_ok=True)
    filename = os.path.join(directory, f"{name}.csv")
    with open(filename, "w", newline="") as file:
        file.write(render_csv(frame, config))
    print(f"Results saved to {filename}")
    return filename
