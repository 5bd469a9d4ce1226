# Subcommands of the kitaev-lab CLI
