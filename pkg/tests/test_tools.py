"""Registre des outils et serveur JSON-RPC."""

import json

import pytest

from server import create_server
from tools import TOOL_MODULES, execute_tool, get_tools_definition


@pytest.fixture
def client():
    return create_server().app.test_client()


def _rpc(client, method, params=None, request_id=1):
    response = client.post("/mcp", json={"jsonrpc": "2.0", "id": request_id, "method": method, "params": params or {}})
    return response.status_code, response.get_json()


def test_tool_definitions():
    definitions = get_tools_definition()
    names = [d["function"]["name"] for d in definitions]

    assert names == list(TOOL_MODULES)
    for definition in definitions:
        assert definition["type"] == "function"
        assert definition["function"]["parameters"]["type"] == "object"


def test_unknown_tool():
    result = execute_tool("book_flight", {})
    assert result["status"] == "error"


def test_rule_coverage_tool():
    result = execute_tool("rule_coverage", {"free_items": [5, 9, 10]})
    assert result["status"] == "success"
    assert result["total"] == 8
    assert result["names"]["6"] == "Task Analysis"
    assert execute_tool("rule_coverage", {"free_items": [11]})["status"] == "error"


def test_summarize_dataset_tool(tmp_path, sample_csv):
    path = tmp_path / "sample.csv"
    path.write_text(sample_csv, encoding="utf-8")

    result = execute_tool("summarize_dataset", {"path": str(path)})
    assert result["status"] == "success"
    assert result["summary"]["n_rows"] == 4
    assert result["validation"]["rows_accepted"] == 4
    assert execute_tool("summarize_dataset", {"path": str(tmp_path / "absent.csv")})["status"] == "error"


def test_run_and_predict_tools(tmp_path, make_row):
    run = execute_tool("run_pipeline", {"seed": 2, "synth_n": 150, "output_dir": str(tmp_path)})
    assert run["status"] == "success"
    assert run["n_test"] == 8
    assert run["winner"] == run["ranking"][0]
    assert set(run["metrics"]) == {"Naive Bayes", "Decision Tree", "Random Forest", "KNN"}

    model_path = f"{run['run_dir']}/models/decision_tree.json"
    rows = [make_row(1, a=(1,) * 10), make_row(2, a=(1,) * 10, sex="")]
    for row in rows:
        del row["Case_No"]
    prediction = execute_tool("predict_education", {"model_path": model_path, "records": rows})
    assert prediction["status"] == "partial"
    assert prediction["failed"] == 1
    assert prediction["predictions"][0]["row"] == 0
    assert "code" in prediction["predictions"][0]


def test_run_pipeline_needs_a_seed():
    assert execute_tool("run_pipeline", {})["status"] == "error"


def test_health_and_index(client):
    health = client.get("/health").get_json()
    assert health["status"] == "ok"
    assert health["tools_count"] == len(TOOL_MODULES)
    assert client.get("/").get_json()["name"] == "asd-pipeline"
    assert client.get("/tools").get_json()["count"] == len(TOOL_MODULES)


def test_rpc_initialize_and_list(client):
    status, body = _rpc(client, "initialize")
    assert status == 200
    assert body["result"]["serverInfo"]["name"] == "asd-pipeline"

    _, body = _rpc(client, "tools/list", request_id=2)
    assert body["id"] == 2
    assert {t["name"] for t in body["result"]["tools"]} == set(TOOL_MODULES)


def test_rpc_tool_call(client):
    _, body = _rpc(client, "tools/call", {"name": "rule_coverage", "arguments": {}})
    payload = json.loads(body["result"]["content"][0]["text"])
    assert body["result"]["isError"] is False
    assert payload["total"] == 1024


def test_rpc_errors(client):
    _, body = _rpc(client, "tools/call", {"name": "missing"})
    assert body["error"]["code"] == -32601
    _, body = _rpc(client, "shutdown")
    assert body["error"]["code"] == -32601
    response = client.post("/mcp", data="not json", content_type="application/json")
    assert response.status_code == 400
