"""
Report Generator Module
Byte-stable JSON reports and HTML summaries of runs, validations and
acceptance checks
"""
from __future__ import annotations

import html
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

import config
from .protocols import ProtocolTranscript


def _normalize(value: Any, digits: int) -> Any:
    """Plain JSON types with floats cut to `digits` significant digits."""
    if isinstance(value, dict):
        return {str(k): _normalize(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v, digits) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return float(f"{value:.{digits}g}")
    if isinstance(value, (complex, np.complexfloating)):
        return [_normalize(value.real, digits), _normalize(value.imag, digits)]
    return value


class ReportGenerator:
    """Generate JSON and HTML reports for c6proto runs"""

    def __init__(self, digits: int = config.FIDELITY_DIGITS):
        self.tool_name = config.TOOL_NAME
        self.version = config.VERSION
        self.digits = digits

    def transcript_dict(self, transcript: ProtocolTranscript) -> Dict:
        return _normalize(transcript.to_dict(), self.digits)

    def to_json(self, data: Dict) -> str:
        return json.dumps(_normalize(data, self.digits), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def generate_json_report(self, data: Dict, output_file: Optional[Union[str, Path]] = None) -> str:
        """Serialize `data` with sorted keys so reruns produce identical files."""
        text = self.to_json(data)
        if output_file:
            Path(output_file).write_text(text, encoding=config.OUTPUT_ENCODING)
        return text

    def generate_html_report(self, data: Dict, output_file: Optional[Union[str, Path]] = None) -> str:
        """
        Generate an HTML summary
        Returns HTML content
        """
        data = _normalize(data, self.digits)
        page = self._get_html_header()
        page += self._get_styles()
        page += '<body>'
        page += self._get_header_section(data)

        if 'criteria' in data:
            page += self._get_criteria_section(data['criteria'])
        if 'protocol' in data:
            page += self._get_transcript_section(data)
        if 'validations' in data:
            for report in data['validations']:
                page += self._get_validation_section(report)
        if 'inference' in data:
            page += self._get_inference_section(data['inference'])

        page += self._get_footer_section()
        page += '</body></html>\n'

        if output_file:
            Path(output_file).write_text(page, encoding=config.OUTPUT_ENCODING)
        return page

    def _get_html_header(self) -> str:
        return f"""<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <title>{self.tool_name} Report</title>
</head>
"""

    def _get_styles(self) -> str:
        return """
<style>
    body { font-family: 'Segoe UI', Tahoma, Geneva, Verdana, sans-serif; background: #f4f5fb; color: #333; }
    .container { max-width: 1100px; margin: 0 auto; padding: 20px; }
    .header, .section { background: white; padding: 20px; border-radius: 8px; margin-bottom: 16px;
                        box-shadow: 0 2px 4px rgba(0, 0, 0, 0.08); }
    .header { border-left: 5px solid #4b5fc1; }
    h1, h2 { color: #4b5fc1; }
    table { width: 100%; border-collapse: collapse; }
    th, td { text-align: left; padding: 6px 10px; border-bottom: 1px solid #e3e3ef; }
    code { font-family: 'Courier New', monospace; }
    .status-pass { color: #1d7a36; font-weight: 600; }
    .status-fail { color: #b3261e; font-weight: 600; }
    .footer { text-align: center; color: #777; font-size: 0.9em; }
</style>
"""

    def _get_header_section(self, data: Dict) -> str:
        seed = data.get('seed')
        seed_text = f"<div><strong>Seed:</strong> {seed}</div>" if seed is not None else ""
        return f"""
<div class="container">
    <div class="header">
        <h1>{self.tool_name}</h1>
        <p>Six-qubit cluster protocol verification report</p>
        <div><strong>Tool:</strong> {self.tool_name} v{self.version}</div>
        {seed_text}
    </div>
"""

    @staticmethod
    def _status(passed: bool) -> str:
        return '<span class="status-pass">PASS</span>' if passed else '<span class="status-fail">FAIL</span>'

    def _get_criteria_section(self, criteria: List[Dict]) -> str:
        section = """
    <div class="section">
        <h2>Acceptance criteria</h2>
        <table>
            <thead><tr><th>#</th><th>Check</th><th>Status</th><th>Result</th></tr></thead>
            <tbody>
"""
        for c in criteria:
            section += (
                f"                <tr><td>{html.escape(str(c['criterion']))}</td>"
                f"<td>{html.escape(c['title'])}</td><td>{self._status(c['passed'])}</td>"
                f"<td>{html.escape(c['message'])}</td></tr>\n"
            )
        passed = sum(1 for c in criteria if c['passed'])
        section += f"""            </tbody>
        </table>
        <p><strong>{passed}/{len(criteria)}</strong> criteria passed</p>
    </div>
"""
        return section

    def _get_transcript_section(self, data: Dict) -> str:
        section = f"""
    <div class="section">
        <h2>Protocol run: {html.escape(data['protocol'])}</h2>
        <p><strong>Fidelity:</strong> {data['fidelity']} &nbsp; <strong>cbits:</strong> {data['cbits']}</p>
        <table>
            <thead><tr><th>Party</th><th>Qubits</th><th>Outcome</th><th>Probability</th><th>cbits</th></tr></thead>
            <tbody>
"""
        for m in data.get('measurements', []):
            section += (
                f"                <tr><td>{html.escape(m['party'])}</td><td><code>{' '.join(m['qubits'])}</code></td>"
                f"<td>{m['outcome']}</td><td>{m['probability']}</td><td>{m['cbits']}</td></tr>\n"
            )
        corrections = ", ".join(html.escape(c) for c in data.get('corrections', []))
        section += f"""            </tbody>
        </table>
        <p><strong>Correction:</strong> <code>{corrections}</code></p>
    </div>
"""
        return section

    def _get_validation_section(self, report: Dict) -> str:
        summary = report['summary']
        section = f"""
    <div class="section">
        <h2>Table {html.escape(str(report['table']))} ({html.escape(report['assignment'])} assignment)</h2>
        <p>{summary['matched']}/{summary['rows']} rows reproduced</p>
        <table>
            <thead><tr><th>Row</th><th>Verdict</th><th>Distance</th><th>Diagnosis</th><th>Erratum</th></tr></thead>
            <tbody>
"""
        for row in report['rows']:
            section += (
                f"                <tr><td>{row['row']}</td><td>{html.escape(row['verdict'])}</td>"
                f"<td>{row['distance']}</td><td>{html.escape(', '.join(row.get('diagnosis', [])))}</td>"
                f"<td>{html.escape(row.get('erratum', ''))}</td></tr>\n"
            )
        section += """            </tbody>
        </table>
    </div>
"""
        return section

    def _get_inference_section(self, inference: Dict) -> str:
        layout = inference['layout']
        return f"""
    <div class="section">
        <h2>Inferred assignment for table {html.escape(str(inference['table']))}</h2>
        <p><strong>Verdict:</strong> {html.escape(inference['verdict'])} &nbsp;
           <strong>Score:</strong> {inference['score']}/{inference['rows']} &nbsp;
           <strong>Candidates:</strong> {inference['candidates']}</p>
        <p><strong>Measured order:</strong> <code>{' '.join(layout['measured_order'])}</code>
           <strong>Print order:</strong> <code>{' '.join(layout['print_order'])}</code></p>
    </div>
"""

    def _get_footer_section(self) -> str:
        return f"""
    <div class="footer">
        <p><strong>{self.tool_name}</strong> v{self.version}</p>
    </div>
</div>
"""
