import pytest
from fastapi.testclient import TestClient

from app.utils import InputError, InvariantViolation, NotFoundError, to_http_exception
from app.version import __version__
from main import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


class TestMeta:
    """健康检查与内置清单"""

    def test_01_health(self, client):
        r = client.get("/api/v1/health")
        assert r.status_code == 200
        body = r.json()
        assert body["code"] == 0
        assert body["data"]["status"] == "healthy"
        assert body["data"]["version"] == __version__

    def test_02_legacy_prefix(self, client):
        assert client.get("/api/version").status_code == 200

    def test_03_builtins(self, client):
        data = client.get("/api/v1/builtins").json()["data"]
        assert "star" in data["models"]
        assert "psi" in data["formulas"]
        assert data["games"] == ["pairs"]

    def test_04_security_headers(self, client):
        r = client.get("/api/v1/health")
        assert r.headers["X-Content-Type-Options"] == "nosniff"
        assert r.headers["Cache-Control"] == "no-store"


class TestOperations:
    """引擎操作"""

    def test_01_check(self, client):
        r = client.post("/api/v1/check", json={"model": "builtin:star", "formula": "builtin:psi", "state": "Star()"})
        assert r.status_code == 200
        assert r.json()["data"]["holds"] is True

    def test_02_repeated_request_hits_cache(self, client):
        payload = {"model": "builtin:loop", "formula": "nu X . <> X"}
        first = client.post("/api/v1/check", json=payload).json()
        second = client.post("/api/v1/check", json=payload).json()
        assert second["message"] == "缓存命中"
        assert second["data"] == first["data"]

    def test_03_inline_model_text(self, client):
        text = "atoms equality\nstate A(x)\nlabel A(x) : p(x)\n"
        r = client.post("/api/v1/check", json={"modelText": text, "formula": "OR a . p(a)"})
        assert r.json()["data"]["orbits"] == 1

    def test_04_solve_game(self, client):
        data = client.post("/api/v1/solve-game", json={"game": "builtin:pairs"}).json()["data"]
        assert data["forall"] == []

    def test_05_bisim(self, client):
        r = client.post("/api/v1/bisim", json={"model": "builtin:infsucc(1)", "x": "P()", "y": "Q()", "k": 1})
        assert r.json()["data"]["bisimilar"] is True

    def test_06_freshpath(self, client):
        r = client.post("/api/v1/freshpath", json={"model": "builtin:loop", "state": "Loop()", "oracle": True})
        data = r.json()["data"]
        assert data["holds"] is True
        assert data["oracle"] == "witness"

    def test_07_translate_ltl(self, client):
        r = client.post("/api/v1/translate-ltl", json={"machine": "builtin:accept-now"})
        assert r.json()["data"]["clauses"] == 15 + 2

    def test_08_orbits(self, client):
        data = client.post("/api/v1/orbits", json={"model": "builtin:star"}).json()["data"]
        assert len(data["states"]) == 2


class TestErrors:
    """错误映射"""

    def test_01_file_paths_rejected(self, client):
        r = client.post("/api/v1/orbits", json={"model": "/etc/passwd"})
        assert r.status_code == 400
        assert r.json()["code"] == 400

    def test_02_formula_file_rejected(self, client):
        r = client.post("/api/v1/check", json={"model": "builtin:star", "formula": "/tmp/x.mu"})
        assert r.status_code == 400

    def test_03_unknown_builtin(self, client):
        r = client.post("/api/v1/orbits", json={"model": "builtin:nope"})
        assert r.status_code == 404

    def test_04_syntax_error(self, client):
        r = client.post("/api/v1/check", json={"model": "builtin:star", "formula": "<> (p(a)"})
        assert r.status_code == 400
        assert "message" in r.json()

    def test_05_k_out_of_range(self, client):
        r = client.post("/api/v1/bisim", json={"model": "builtin:star", "x": "Star()", "y": "Star()", "k": 99})
        assert r.status_code == 422

    def test_06_missing_model(self, client):
        r = client.post("/api/v1/orbits", json={})
        assert r.status_code == 400


class TestErrorMapping:
    """异常到 HTTP 状态码的映射"""

    def test_01_engine_errors_keep_their_code(self):
        assert to_http_exception(NotFoundError("x"), "f").status_code == 404
        assert to_http_exception(InputError("x"), "f").status_code == 400
        assert to_http_exception(InvariantViolation("x"), "f").status_code == 500

    def test_02_other_exceptions_hide_details(self):
        exc = to_http_exception(ValueError("secret"), "f")
        assert exc.status_code == 500
        assert "secret" not in exc.detail
