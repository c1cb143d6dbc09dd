"""Numerical modules: deployment, antenna, channel, terrain, downlink, uplink, enhancements and mobility."""
