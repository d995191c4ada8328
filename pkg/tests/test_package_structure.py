"""Package structure tests."""

from typer.testing import CliRunner


def test_package_exports_public_api() -> None:
    import reebvolmin
    from reebvolmin import Config, ReebVolminError, load_config, minimize

    assert Config.__name__ == "Config"
    assert issubclass(ReebVolminError, Exception)
    assert callable(load_config)
    assert callable(minimize)
    assert sorted(reebvolmin.__all__) == reebvolmin.__all__
    assert all(hasattr(reebvolmin, name) for name in reebvolmin.__all__)


def test_main_module_uses_cli_app() -> None:
    from reebvolmin.__main__ import app
    from reebvolmin.cli import app as cli_app

    assert app is cli_app


def test_cli_help_lists_commands() -> None:
    from reebvolmin.cli import app

    result = CliRunner().invoke(app, ["--help"])

    assert result.exit_code == 0
    for command in ("check-good", "normalize-height", "volume", "minimize", "charges", "obstruct", "dfutaki", "analyze"):
        assert command in result.output


def test_cli_help_groups_commands_into_sections() -> None:
    from reebvolmin.cli import app

    result = CliRunner().invoke(app, ["--help"])

    assert result.exit_code == 0
    assert "Geometry" in result.output
    assert "Spectrum" in result.output
    assert "Obstructions" in result.output
    assert "Pipeline" in result.output
