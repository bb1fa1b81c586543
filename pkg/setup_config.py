#!/usr/bin/env python3
"""
Setup script for the Kuramoto-Daido lab.
Writes the reference run_config.json and a .env template, then checks that both load.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from dotenv import load_dotenv

from config import build_distribution, default_config_dict, load_config, resolve_runtime

ENV_TEMPLATE = """# Kuramoto-Daido lab defaults
# Auto-generated by setup_config.py; command-line flags and run_config.json take precedence

# Where CSV/JSON artifacts are written
KDLAB_OUTPUT_DIR=output

# Worker threads for sweeps (1 = reference, byte-identical mode)
KDLAB_THREADS=1

# DEBUG, INFO, WARNING or ERROR
KDLAB_LOG_LEVEL=WARNING

# Seed used when the config does not set simulation.seed
KDLAB_SEED=0

# Set to 1 to run the long simulation tests
KDLAB_RUN_SLOW=0
"""


def write_file(path: Path, content: str, force: bool) -> bool:
    """Write a file unless it exists and force is off"""
    if path.exists() and not force:
        print(f"📄 Existing {path} found, keeping it (use --force to overwrite)")
        return True
    try:
        path.write_text(content, encoding="utf-8")
        print(f"✅ {path} written")
        return True
    except OSError as e:
        print(f"❌ Error writing {path}: {e}")
        return False


def test_configuration(config_path: Path) -> bool:
    """Load the .env and the run config the way main.py does"""
    print("\n🧪 Testing Configuration...")
    load_dotenv()

    found = [var for var in ("KDLAB_OUTPUT_DIR", "KDLAB_THREADS", "KDLAB_LOG_LEVEL", "KDLAB_SEED") if os.getenv(var)]
    if found:
        print(f"✅ Found environment defaults: {', '.join(found)}")

    try:
        config = resolve_runtime(load_config(config_path))
        dist = build_distribution(config.distribution)
    except Exception as e:
        print(f"❌ {config_path} does not load: {e}")
        return False

    print(f"✅ {dist.label}, K = {config.model.K:g}, h = {config.model.h:g}, "
          f"{config.simulation.kind} simulator, output -> {config.output.directory}")
    print("✅ Configuration test passed!")
    return True


def main():
    parser = argparse.ArgumentParser(description="Write the reference run config and .env template")
    parser.add_argument("--config", default="run_config.json")
    parser.add_argument("--env", default=".env")
    parser.add_argument("--force", action="store_true", help="overwrite existing files")
    args = parser.parse_args()

    print("🚀 Kuramoto-Daido Lab Setup")
    print("=" * 50)
    try:
        config_path = Path(args.config)
        config_text = json.dumps(default_config_dict(), indent=2) + "\n"
        if not (write_file(config_path, config_text, args.force) and write_file(Path(args.env), ENV_TEMPLATE, args.force)):
            print("❌ Setup failed!")
            sys.exit(1)

        if not test_configuration(config_path):
            print("❌ Configuration test failed!")
            sys.exit(1)

        print("\n🎉 Setup completed successfully!")
        print("\n📋 Next steps:")
        print("1. Install dependencies: pip install -r requirements.txt")
        print(f"2. Transition report: python main.py report --config {config_path}")
        print(f"3. Acceptance suite: python main.py verify --config {config_path}")

    except KeyboardInterrupt:
        print("\n\n⚠️  Setup cancelled by user.")
        sys.exit(0)


if __name__ == "__main__":
    main()
