def test_stream_seed():
    from blockorder.utils import stream_seed

    assert stream_seed(7, 0, 1) == stream_seed(7, 0, 1)
    assert stream_seed(7, 0, 1) != stream_seed(7, 1, 0)
    assert stream_seed(7) != stream_seed(8)
    assert 0 <= stream_seed(123, 4, 5, 6) < 2 ** 64


def test_method_key():
    from blockorder.utils import method_key

    assert method_key('kt') == method_key('kt')
    assert method_key('kt') != method_key('bhmc')
    assert 0 <= method_key('kt-dyn') < 2 ** 32


def test_make_rng():
    from blockorder.utils import make_rng

    first = make_rng(42, 1).random(5)
    second = make_rng(42, 1).random(5)
    other = make_rng(42, 2).random(5)
    assert (first == second).all()
    assert not (first == other).all()


def test_read_json(tmpdir):
    from blockorder.utils import read_json, write_json

    assert read_json('lame.jpg') is None
    path = str(tmpdir.join('data.json'))
    write_json(path, {'b': 1, 'a': [1, 2]})
    assert read_json(path) == {'a': [1, 2], 'b': 1}
    with open(path, encoding='utf-8') as handle:
        text = handle.read()
    assert text.endswith('\n')
    assert text.index('"a"') < text.index('"b"')

    bad = tmpdir.join('bad.json')
    bad.write('{"a": ')
    assert read_json(str(bad)) is None


def test_time_execution():
    from blockorder.utils import time_execution

    @time_execution
    def double(x):
        """Doubles."""
        return 2 * x

    assert double(4) == 8
    assert double.__name__ == 'double'
    assert double.__doc__ == 'Doubles.'


def test_handle_keyboard_interrupt():
    import pytest
    from blockorder.utils import handle_keyboard_interrupt

    @handle_keyboard_interrupt
    def interrupted():
        raise KeyboardInterrupt

    with pytest.raises(SystemExit) as info:
        interrupted()
    assert info.value.code == 0


def test_time_execution_logs(caplog):
    import logging
    from blockorder.utils import time_execution

    @time_execution
    def noop():
        return None

    with caplog.at_level(logging.DEBUG):
        noop()
    assert 'noop took' in caplog.text


def _reset_logging(level):
    import logging
    from blockorder.utils import _HANDLERS

    root = logging.getLogger()
    while _HANDLERS:
        handler = _HANDLERS.pop()
        root.removeHandler(handler)
        handler.close()
    root.setLevel(level)
    logging.captureWarnings(False)


def test_setup_logging(tmpdir):
    import logging
    from blockorder.utils import setup_logging

    level = logging.getLogger().level
    path = tmpdir.join('run.log')
    try:
        setup_logging(str(path), colors=False, show_progress=False)
        logging.getLogger('check').debug('hello from the check')
    finally:
        _reset_logging(level)
    text = path.read()
    assert 'hello from the check' in text
    assert 'numpy' in text


def test_setup_logging_replaces_handlers(tmpdir):
    import logging
    from blockorder.utils import _HANDLERS, setup_logging

    root = logging.getLogger()
    level = root.level
    _reset_logging(level)
    others = list(root.handlers)
    path = str(tmpdir.join('run.log'))
    try:
        setup_logging(path, colors=False, show_progress=False)
        first = list(_HANDLERS)
        setup_logging(path, colors=False, show_progress=False)
        setup_logging(colors=False, show_progress=False)
        assert len(_HANDLERS) == 1
        assert root.handlers == others + _HANDLERS
        assert all(handler not in root.handlers for handler in first)
    finally:
        _reset_logging(level)
    assert root.handlers == others
