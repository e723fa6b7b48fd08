"""CLI command modules: one ``main(args) -> int`` per subcommand."""
