"""
OpenTelemetry configuration for simulator runs.

Spans are always recorded by the SDK; an OTLP gRPC exporter (for example
Arize Phoenix on http://localhost:4317) is attached only when an endpoint is
configured, so offline runs never try to reach a collector.
"""

from __future__ import annotations

from typing import Optional

from opentelemetry import trace
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor


def setup_tracer(service_name: str, endpoint: Optional[str] = None) -> trace.Tracer:
    """
    Initialize the OpenTelemetry SDK and return a tracer.

    Args:
        service_name: Logical name used for the tracing service.
        endpoint: OTLP gRPC endpoint; None records spans without exporting them.
    """
    resource = Resource.create({"service.name": service_name})
    provider = TracerProvider(resource=resource)
    if endpoint:
        from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter

        exporter = OTLPSpanExporter(endpoint=endpoint, insecure=True)
        provider.add_span_processor(BatchSpanProcessor(exporter))
    trace.set_tracer_provider(provider)
    return trace.get_tracer(service_name)
