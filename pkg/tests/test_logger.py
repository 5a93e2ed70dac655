import logging

from utils import logger as logger_module


def test_log_path_follows_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(logger_module.LOG_DIR_ENV, str(tmp_path / "logs"))

    path = logger_module.log_path()

    assert path.parent == tmp_path / "logs"
    assert path.parent.exists()


def test_read_recent_logs_without_file(monkeypatch, tmp_path):
    monkeypatch.setenv(logger_module.LOG_DIR_ENV, str(tmp_path))

    assert "not created yet" in logger_module.read_recent_logs()


def test_read_recent_logs_returns_tail(monkeypatch, tmp_path):
    monkeypatch.setenv(logger_module.LOG_DIR_ENV, str(tmp_path))
    logger_module.log_path().write_text("".join(f"line {i}\n" for i in range(10)), encoding="utf-8")

    assert logger_module.read_recent_logs(max_lines=2) == "line 8\nline 9"


def test_handlers_are_attached_once():
    logger_module.get_logger("first")
    before = len(logging.getLogger().handlers)

    named = logger_module.get_logger("second")

    assert len(logging.getLogger().handlers) == before
    assert named.name == "second"
