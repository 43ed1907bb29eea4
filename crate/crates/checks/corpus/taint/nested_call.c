int main() {
    system(getenv("CMD")); // source:a sink:a
    return 0;
}
