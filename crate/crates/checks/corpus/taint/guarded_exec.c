int check(int v) {
    if (v > 100) {
        return 0;
    }
    return 1;
}

int main() {
    char cmd[16];
    int ok;
    scanf("%s", cmd); // source:a
    ok = check(cmd);
    if (ok > 0) {
        exec(cmd); // sink:a
    }
    return 0;
}
