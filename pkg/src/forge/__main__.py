from forge.cli import entrypoint

entrypoint()
