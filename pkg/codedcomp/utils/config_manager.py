"""
Configuration Manager for codedcomp

Utility functions for managing codedcomp configurations and workspaces.
"""

import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..config import CodedCompConfig
from .cache import ArtifactCache


class ConfigManager:
    """Utility class for managing codedcomp configurations."""

    def __init__(self, env_path: Optional[Path] = None):
        self.env_path = Path(env_path) if env_path is not None else Path(".env")

    def create_env_file(self, template: str = "development", force: bool = False) -> Path:
        """Create a .env file from a configuration template."""
        if self.env_path.exists() and not force:
            raise FileExistsError(f"{self.env_path} already exists. Use force=True to overwrite.")

        config = CodedCompConfig.load_template(template)
        with open(self.env_path, "w") as f:
            f.write(self._config_to_env(config, template))

        return self.env_path

    def _config_to_env(self, config: CodedCompConfig, template: str) -> str:
        """Convert a configuration to .env format."""
        n_max = ";".join(f"{key}={value}" for key, value in sorted(config.default_n_max.items()))
        lines = [
            "# codedcomp configuration",
            f"# Generated from the '{template}' template",
            "",
            "# Core Settings",
            f'CODEDCOMP_WORKSPACE="{config.workspace_path}"',
            f"CODEDCOMP_SEED={config.seed}",
            f"CODEDCOMP_LOG_LEVEL={config.log_level}",
            "",
            "# Monte-Carlo Budgets",
            f"CODEDCOMP_ENUM_LIMIT={config.enum_limit}",
            f"CODEDCOMP_MC_TRIALS={config.mc_trials}",
            f"CODEDCOMP_REJECTION_BUDGET={config.rejection_budget}",
            f"CODEDCOMP_CHUNK_SIZE={config.chunk_size}",
            f"CODEDCOMP_WORKERS={config.workers}",
            "",
            "# Numerics",
            f"CODEDCOMP_MAX_KRONECKER_LEVEL={config.max_kronecker_level}",
            f"CODEDCOMP_MDS_PIVOT_TOLERANCE={config.mds_pivot_tolerance}",
            f"CODEDCOMP_SINGULAR_FLOOR={config.singular_floor}",
            f"CODEDCOMP_QUAD_ABS_TOL={config.quad_abs_tol}",
            f"CODEDCOMP_QUAD_TAIL_TOL={config.quad_tail_tol}",
            f"CODEDCOMP_CONSISTENCY_RTOL={config.consistency_rtol}",
            f"CODEDCOMP_CERTIFY_RANK={'true' if config.certify_rank_deficiency else 'false'}",
            f'CODEDCOMP_DEFAULT_N_MAX="{n_max}"',
            "",
            "# Cache",
            f"CODEDCOMP_CACHE={'true' if config.cache_enabled else 'false'}",
        ]
        return "\n".join(lines) + "\n"

    def list_templates(self) -> List[str]:
        """List available configuration templates."""
        return CodedCompConfig.list_templates()

    def validate_current_config(self) -> Dict[str, Any]:
        """Validate the current configuration and return status."""
        try:
            config = CodedCompConfig.from_env()
            config.validate()
            return {"valid": True, "config": config, "errors": []}
        except Exception as e:
            return {"valid": False, "config": None, "errors": [str(e)]}

    def setup_workspace(self, config: Optional[CodedCompConfig] = None) -> Path:
        """Set up the workspace directory structure."""
        if config is None:
            config = CodedCompConfig.from_env()

        workspace = Path(config.workspace_path)
        for directory in (config.cache_dir, config.logs_dir, config.results_dir):
            directory.mkdir(parents=True, exist_ok=True)

        snapshot = workspace / "config.json"
        if not snapshot.exists():
            config.save_to_file(snapshot)

        print(f"✅ Workspace set up at: {workspace}")
        print(f"   - Cache directory: {config.cache_dir}")
        print(f"   - Logs directory: {config.logs_dir}")
        print(f"   - Results directory: {config.results_dir}")
        return workspace

    def clear_cache(self, config: Optional[CodedCompConfig] = None) -> int:
        """Remove cached generators and projection plans."""
        if config is None:
            config = CodedCompConfig.from_env()
        return ArtifactCache(config.cache_dir).clear()


def main(argv: Optional[List[str]] = None) -> None:
    """CLI interface for configuration management."""
    import argparse

    parser = argparse.ArgumentParser(description="codedcomp Configuration Manager")
    parser.add_argument("command", choices=["list", "create-env", "validate", "setup-workspace", "clear-cache"])
    parser.add_argument("--template", default="development", help="Configuration template to use")
    parser.add_argument("--force", action="store_true", help="Force overwrite existing files")

    args = parser.parse_args(argv)

    manager = ConfigManager()

    if args.command == "list":
        print("Available configuration templates:")
        for template in manager.list_templates():
            print(f"  - {template}")

    elif args.command == "create-env":
        try:
            env_path = manager.create_env_file(args.template, args.force)
            print(f"✅ Created .env file from '{args.template}' template: {env_path}")
        except FileExistsError as e:
            print(f"❌ {e}")
            sys.exit(1)
        except Exception as e:
            print(f"❌ Error creating .env file: {e}")
            sys.exit(1)

    elif args.command == "validate":
        result = manager.validate_current_config()
        if result["valid"]:
            config = result["config"]
            print("✅ Configuration is valid!")
            print(f"   - Seed: {config.seed}")
            print(f"   - Monte-Carlo trials: {config.mc_trials}")
            print(f"   - Workers: {config.workers}")
            print(f"   - Workspace: {config.workspace_path}")
        else:
            print("❌ Configuration validation failed:")
            for error in result["errors"]:
                print(f"   - {error}")
            sys.exit(1)

    elif args.command == "setup-workspace":
        try:
            manager.setup_workspace()
        except Exception as e:
            print(f"❌ Error setting up workspace: {e}")
            sys.exit(1)

    elif args.command == "clear-cache":
        removed = manager.clear_cache()
        print(f"✅ Removed {removed} cache entries")


if __name__ == "__main__":
    main()
